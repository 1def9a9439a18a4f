use nalgebra::Vector2;

use super::*;
use crate::builtin::{builtin_geometry, BuiltinName, BuiltinParams};
use crate::geometry::analytic::Ball;
use crate::geometry::{Aabb, Surface, SurfaceGeometry};

fn square_domain(half: f64) -> Aabb<2> {
    Aabb::new(Vector2::new(-half, -half), Vector2::new(half, half))
}

fn circle_field(radius: f64, lc: f64) -> LevelSetField<2> {
    LevelSetField::build(&Ball::new(Vector2::zeros(), radius), square_domain(radius + 5.0 * lc), lc).unwrap()
}

fn wedge_field(tip: f64, lc: f64) -> LevelSetField<2> {
    let params = BuiltinParams::new().with("tip", tip);
    let SurfaceGeometry::Planar(poly) = builtin_geometry(BuiltinName::Wedge, &params).unwrap() else {
        panic!()
    };
    LevelSetField::build(&poly, LevelSetField::default_domain(&poly, lc), lc).unwrap()
}

/// True when the 3^d neighbourhood of `g` is stored, so `fill_phi` reaches it.
fn fully_stored(field: &LevelSetField<2>, g: [i64; 2]) -> bool {
    offsets::<2>(-1, 1).all(|o| matches!(field.locate(add(g, o)), FineCell::Stored { .. }))
}

fn core_cells(field: &LevelSetField<2>) -> Vec<CellRef> {
    field
        .packages()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.core)
        .flat_map(|(p, _)| (0..16).map(move |l| CellRef { package: p, local: l }))
        .collect()
}

#[test]
fn corners_of_uniform_and_linear_fields() {
    let mut field = circle_field(1.0, 0.1);
    field.fill_phi(|_| 0.37);
    let g = field.packages()[0].fine_index(5);
    assert!(corner_phi(&field, g).iter().all(|&c| (c - 0.37).abs() < 1e-15));

    field.fill_phi(|p| p.x);
    let lf = field.lf();
    for (_, _, g) in field.stored_cells().step_by(11) {
        let center = field.fine_center(g);
        let corners = corner_phi(&field, g);
        if !fully_stored(&field, g) {
            continue;
        }
        for (k, c) in corners.iter().enumerate() {
            let x = center.x + if k & 1 == 1 { 0.5 * lf } else { -0.5 * lf };
            assert!((c - x).abs() < 1e-12, "{c} vs {x}");
        }
    }
}

#[test]
fn corners_are_neighbour_means() {
    let mut field = circle_field(1.0, 0.1);
    field.fill_phi(|p| (13.1 * p.x).sin() * (7.3 * p.y + 0.4).cos() + 0.01 * p.x * p.y);
    for (_, _, g) in field.stored_cells().step_by(17) {
        let corners = corner_phi(&field, g);
        for (k, c) in corners.iter().enumerate() {
            let sx: [i64; 2] = if k & 1 == 1 { [0, 1] } else { [-1, 0] };
            let sy: [i64; 2] = if k & 2 == 2 { [0, 1] } else { [-1, 0] };
            let mut sum = 0.0;
            for dx in sx {
                for dy in sy {
                    sum += field.phi_at([g[0] + dx, g[1] + dy]);
                }
            }
            let expected = sum / 4.0;
            assert!((c - expected).abs() <= 1e-15 * expected.abs().max(1.0));
        }
    }
}

#[test]
fn stripe_field_cuts_one_column() {
    let mut field = circle_field(1.0, 0.1);
    let lf = field.lf();
    for frac in [0.2, 0.5, 0.8] {
        let x0 = field.origin().x + (60.0 + frac) * lf;
        field.fill_phi(|p| p.x - x0);
        let ids = classify_cells(&field, 0.75 * lf);
        let cut: std::collections::BTreeSet<i64> = field
            .stored_cells()
            .filter(|&(_, _, g)| fully_stored(&field, g))
            .filter(|&(p, l, _)| ids.get(CellRef { package: p, local: l }).contains(InterfaceId::ZERO_CUT))
            .map(|(_, _, g)| g[0])
            .collect();
        assert_eq!(cut.into_iter().collect::<Vec<_>>(), vec![60]);
    }
}

#[test]
fn positive_cut_ring_lies_outside_zero_ring() {
    let field = circle_field(1.0, 0.1);
    let lf = field.lf();
    let ids = classify_cells(&field, 0.75 * lf);
    let mut bins = [false; 64];
    let mut zero_max: f64 = 0.0;
    let mut plus_min = f64::INFINITY;
    for (p, l, g) in field.stored_cells() {
        let id = ids.get(CellRef { package: p, local: l });
        let x = field.fine_center(g);
        if id.contains(InterfaceId::POSITIVE_CUT) {
            plus_min = plus_min.min(x.norm());
            let a = x.y.atan2(x.x) + std::f64::consts::PI;
            bins[((a / (2.0 * std::f64::consts::PI) * 64.0) as usize).min(63)] = true;
        }
        if id.contains(InterfaceId::ZERO_CUT) {
            zero_max = zero_max.max(x.norm());
        }
    }
    assert!(plus_min > 1.0, "{plus_min}");
    assert!(zero_max < 1.0 + 0.75 * lf);
    assert!(bins.iter().all(|&b| b), "ring is not closed");
}

#[test]
fn no_surface_no_flags() {
    let mut field = circle_field(1.0, 0.1);
    field.fill_phi(|_| 1.0);
    let ids = classify_cells(&field, 0.75 * field.lf());
    assert!(field
        .stored_cells()
        .filter(|&(_, _, g)| fully_stored(&field, g))
        .all(|(p, l, _)| ids.get(CellRef { package: p, local: l }).is_empty()));
}

#[test]
fn gap_cut_excludes_zero_cut() {
    assert_eq!(classify_values(&[-1.0, 1.0, 1.0, 1.0], 0.1, 0.5), InterfaceId::ZERO_CUT | InterfaceId::NEGATIVE_CUT | InterfaceId::POSITIVE_CUT);
    assert_eq!(classify_values(&[0.1, 0.2, 0.3, 0.2], 0.2, 0.5), InterfaceId::GAP_CUT);
    assert_eq!(classify_values(&[0.4, 0.6, 0.6, 0.6], 0.55, 0.5), InterfaceId::POSITIVE_CUT);
    assert_eq!(classify_values(&[0.0; 4], 0.0, 0.5), InterfaceId::NONE);
}

#[test]
fn resolved_circle_has_no_unresolved_cells() {
    let field = circle_field(1.0, 0.1);
    let ids = classify_cells(&field, 0.75 * field.lf());
    assert!(find_non_resolved(&field, &ids).is_empty());
}

#[test]
fn thin_wedge_tip_is_unresolved_on_the_inside() {
    let lc = 0.08;
    let field = wedge_field(0.5 * lc / 4.0, lc);
    let ids = classify_cells(&field, 0.75 * field.lf());
    let sets = find_non_resolved(&field, &ids);
    assert!(!sets.minus.is_empty());
    let tip = sets
        .minus
        .iter()
        .map(|c| field.fine_center(field.packages()[c.package].fine_index(c.local)).x)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(tip > 0.9, "{tip}");
    // exhaustive recheck of the rule for every core cell
    let neighborhood: Vec<_> = offsets::<2>(-1, 1).collect();
    for c in core_cells(&field) {
        let id = ids.get(c);
        let g = field.packages()[c.package].fine_index(c.local);
        let has_minus = neighborhood
            .iter()
            .any(|o| ids.at(&field, add(g, *o)).contains(InterfaceId::NEGATIVE_CUT));
        let expected = id.intersects(InterfaceId::ZERO_CUT | InterfaceId::GAP_CUT) && !has_minus;
        assert_eq!(sets.minus.contains(&c), expected);
    }
}

#[test]
fn tiny_blob_is_unresolved_inside_only() {
    let lc = 0.1;
    let lf = lc / 4.0;
    let blob = Ball::new(Vector2::new(0.013, -0.007), 0.5 * lf);
    let field = LevelSetField::build(&blob, square_domain(0.6), lc).unwrap();
    let ids = classify_cells(&field, 0.75 * lf);
    let sets = find_non_resolved(&field, &ids);
    assert!(sets.plus.is_empty());
    let interface: Vec<CellRef> = core_cells(&field)
        .into_iter()
        .filter(|c| ids.get(*c).intersects(InterfaceId::ZERO_CUT | InterfaceId::GAP_CUT))
        .collect();
    assert!(!interface.is_empty());
    assert!(interface.iter().all(|c| sets.minus.contains(c)));
}

#[test]
fn redistance_with_empty_window_uses_limit() {
    let mut field = circle_field(1.0, 0.1);
    let lf = field.lf();
    let a = core_cells(&field)[5];
    let mut ids = classify_cells(&field, 0.75 * lf);
    for v in ids.ids.iter_mut().flatten() {
        *v = InterfaceId::NONE;
    }
    let sets = NonResolved { plus: vec![a], minus: vec![] };
    let values = redistance_values(&field, &ids, &sets, 3.0 * lf, 2);
    assert_eq!(values, vec![(a, -3.0 * lf)]);

    // one positive-cut cell one step along +x
    let g = field.packages()[a.package].fine_index(a.local);
    let FineCell::Stored { package, local } = field.locate([g[0] + 1, g[1]]) else { panic!() };
    ids.ids[package][local] = InterfaceId::POSITIVE_CUT;
    field.packages_mut()[package].phi[local] = 0.2 * lf;
    field.packages_mut()[package].normal[local] = Vector2::new(1.0, 0.0);
    let values = redistance_values(&field, &ids, &sets, 3.0 * lf, 2);
    assert!((values[0].1 + 1.2 * lf).abs() < 1e-15);

    // mirrored rule for the minus set
    ids.ids[package][local] = InterfaceId::NEGATIVE_CUT;
    field.packages_mut()[package].phi[local] = -0.2 * lf;
    let sets = NonResolved { plus: vec![], minus: vec![a] };
    let values = redistance_values(&field, &ids, &sets, 3.0 * lf, 2);
    assert!((values[0].1 - 1.2 * lf).abs() < 1e-15);
}

#[test]
fn double_membership_keeps_sign_without_levels() {
    let mut field = circle_field(1.0, 0.1);
    let lf = field.lf();
    let a = core_cells(&field)[3];
    let mut ids = classify_cells(&field, 0.75 * lf);
    for v in ids.ids.iter_mut().flatten() {
        *v = InterfaceId::NONE;
    }
    let sets = NonResolved { plus: vec![a], minus: vec![a] };
    field.packages_mut()[a.package].phi[a.local] = -0.1 * lf;
    assert_eq!(redistance_values(&field, &ids, &sets, 3.0 * lf, 2), vec![(a, -3.0 * lf)]);
    field.packages_mut()[a.package].phi[a.local] = 0.1 * lf;
    assert_eq!(redistance_values(&field, &ids, &sets, 3.0 * lf, 2), vec![(a, 3.0 * lf)]);
}

#[test]
fn clean_circle_is_untouched() {
    let mut field = circle_field(1.0, 0.1);
    let before = field.clone();
    let options = CleanOptions::for_spacing(field.lf());
    let report = clean(&mut field, &options).unwrap();
    assert!(report.already_clean());
    assert_eq!(report.passes.len(), 1);
    for (a, b) in field.packages().iter().zip(before.packages()) {
        assert_eq!(a.phi, b.phi);
    }
    assert!(report.to_table().contains("already clean"));
    assert!(field.stored_cells().any(|(p, l, _)| field.packages()[p].interface_id[l].contains(InterfaceId::ZERO_CUT)));
}

#[test]
fn tiny_blob_is_removed() {
    let lc = 0.1;
    let lf = lc / 4.0;
    let blob = Ball::new(Vector2::new(0.013, -0.007), 0.5 * lf);
    let mut field = LevelSetField::build(&blob, square_domain(0.6), lc).unwrap();
    let tags = field.tags().to_vec();
    let report = clean(&mut field, &CleanOptions::for_spacing(lf)).unwrap();
    assert!(report.complete);
    assert!(report.total_modified() > 0);
    assert_eq!(field.tags(), &tags[..]);
    assert!(field.stored_cells().all(|(p, l, _)| field.packages()[p].phi[l] > 0.0));
    assert!(blob.signed_distance(&blob.center).unwrap() < 0.0);
}

#[test]
fn cleaning_is_idempotent_and_bounded() {
    let lc = 0.08;
    let mut field = wedge_field(0.5 * lc / 4.0, lc);
    let lf = field.lf();
    let report = clean(&mut field, &CleanOptions::for_spacing(lf)).unwrap();
    assert!(report.complete, "{}", report.to_table());
    assert!(report.total_modified() > 0);
    assert_eq!(report.final_non_resolved(), 0);
    let seq = report.non_resolved_sequence();
    assert!(seq.windows(2).all(|w| w[1] <= w[0]), "{seq:?}");
    let again = clean(&mut field, &CleanOptions::for_spacing(lf)).unwrap();
    assert_eq!(again.total_modified(), 0);
}

#[test]
fn replacements_respect_sign_and_limit() {
    let lc = 0.08;
    let field = wedge_field(0.5 * lc / 4.0, lc);
    let lf = field.lf();
    let mut ids = classify_cells(&field, 0.75 * lf);
    let sets = find_non_resolved(&field, &ids);
    ids.mark(&sets);
    for (c, v) in redistance_values(&field, &ids, &sets, 3.0 * lf, 2) {
        assert!(v.abs() <= 3.0 * lf);
        assert!(field.packages()[c.package].core);
        let in_plus = sets.plus.contains(&c);
        let in_minus = sets.minus.contains(&c);
        if in_plus && !in_minus {
            assert!(v < 0.0);
        }
        if in_minus && !in_plus {
            assert!(v > 0.0);
        }
    }
}
