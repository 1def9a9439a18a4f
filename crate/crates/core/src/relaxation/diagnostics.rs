use std::fmt::Write as _;

/// Default trailing window of the plateau test.
pub const PLATEAU_WINDOW: usize = 50;
/// Default relative spread below which the window counts as a plateau.
pub const PLATEAU_TOLERANCE: f64 = 0.10;

/// Per-iteration relaxation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub dt: f64,
    /// `(1/N) Σ ½ m |Δr/Δt|²`.
    pub avg_kinetic_energy: f64,
    pub max_disp: f64,
    pub bounded_count: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsSeries {
    pub records: Vec<StepRecord>,
}

impl DiagnosticsSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn kinetic_energy(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.avg_kinetic_energy).collect()
    }

    /// `(max − min) / mean` of the kinetic energy over the `window` iterations
    /// ending at iteration `end` (1-based, inclusive).
    pub fn window_spread(&self, end: usize, window: usize) -> Option<f64> {
        if window == 0 || end < window || end > self.records.len() {
            return None;
        }
        let slice = &self.records[end - window..end];
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for r in slice {
            lo = lo.min(r.avg_kinetic_energy);
            hi = hi.max(r.avg_kinetic_energy);
            sum += r.avg_kinetic_energy;
        }
        let mean = sum / window as f64;
        Some(if mean > 0.0 { (hi - lo) / mean } else { 0.0 })
    }

    /// First iteration (1-based) whose trailing window has a relative spread
    /// below `tolerance`.
    pub fn first_plateau(&self, window: usize, tolerance: f64) -> Option<usize> {
        (window..=self.records.len()).find(|&end| self.window_spread(end, window).is_some_and(|s| s < tolerance))
    }

    /// Whether the trailing window of the whole series is a plateau.
    pub fn converged(&self) -> bool {
        self.window_spread(self.records.len(), PLATEAU_WINDOW)
            .is_some_and(|s| s < PLATEAU_TOLERANCE)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,avg_kinetic_energy,max_disp,bounded_count\n");
        for (i, r) in self.records.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", i + 1, r.avg_kinetic_energy, r.max_disp, r.bounded_count);
        }
        s
    }
}
