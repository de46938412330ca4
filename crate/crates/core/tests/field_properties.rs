use num_complex::Complex64;
use proptest::prelude::*;
use ris_core::field::{
    directivity, distance, element_contributions, far_field_direct, field_from_contributions, reflected_field_on_plane,
    PropagationContext, Spreading,
};
use ris_core::{ApertureLayout, Excitation, PhasePattern, PlaneGrid, State, UnitCellStateTable, UvGrid};

fn grid() -> PlaneGrid {
    PlaneGrid::new(7, 9, 0.02, 0.25).unwrap().centered_at(0.01, -0.02)
}

fn rel_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_the_source_scales_the_field(bits in any::<u64>(), re in -3.0..3.0f64, im in -3.0..3.0f64, th in 0.0..1.2f64) {
        let layout = ApertureLayout::new(4, 3, 0.03).unwrap();
        let pattern = PhasePattern::from_bits(&layout, bits);
        let exc = Excitation::plane_wave(th, 0.4).unwrap();
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 1e-3);
        let ctx = PropagationContext::default();
        let table = UnitCellStateTable::default();
        let a = reflected_field_on_plane(&ctx, &exc, &layout, &pattern, &table, &grid()).unwrap();
        let b = reflected_field_on_plane(&ctx, &exc.scaled(c), &layout, &pattern, &table, &grid()).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(rel_close(c * x, *y, 1e-12));
        }
    }

    #[test]
    fn field_is_the_sum_of_single_element_fields(bits in any::<u64>(), nx in 1usize..=4, ny in 1usize..=4) {
        let layout = ApertureLayout::new(nx, ny, 0.03).unwrap();
        let pattern = PhasePattern::from_bits(&layout, bits);
        let ctx = PropagationContext::default().with_spreading(Spreading::Spherical);
        let exc = Excitation::point_source([0.1, 0.0, 0.8], 1.0).unwrap();
        let table = UnitCellStateTable::default();
        let whole = reflected_field_on_plane(&ctx, &exc, &layout, &pattern, &table, &grid()).unwrap();
        let contribs = element_contributions(&ctx, &exc, &layout, &grid()).unwrap();
        for k in 0..grid().len() {
            let mut sum = Complex64::new(0.0, 0.0);
            for m in 0..layout.len() {
                sum += contribs.row(m)[k] * table.reflection(pattern.states()[m]);
            }
            let got = whole.values().as_slice().unwrap()[k];
            prop_assert!(rel_close(sum, got, 1e-12));
        }
    }

    #[test]
    fn flipping_one_element_subtracts_twice_its_contribution(bits in any::<u64>(), m in 0usize..16) {
        let layout = ApertureLayout::new(4, 4, 0.03).unwrap();
        let pattern = PhasePattern::from_bits(&layout, bits);
        let ctx = PropagationContext::default();
        let exc = Excitation::normal_incidence();
        let table = UnitCellStateTable::default();
        let contribs = element_contributions(&ctx, &exc, &layout, &grid()).unwrap();
        let before = field_from_contributions(&contribs, &pattern, &table).unwrap();
        let mut flipped = pattern.clone();
        flipped.flip(m);
        let after = field_from_contributions(&contribs, &flipped, &table).unwrap();
        let own = table.reflection(pattern.states()[m]);
        for (k, (b, a)) in before.values().iter().zip(after.values()).enumerate() {
            let expected = b - 2.0 * contribs.row(m)[k] * own;
            prop_assert!((expected - a).norm() <= 1e-12 * b.norm().max(1.0));
        }
    }

    #[test]
    fn distance_is_symmetric(a in prop::array::uniform3(-5.0..5.0f64), b in prop::array::uniform3(-5.0..5.0f64)) {
        prop_assert_eq!(distance(a, b), distance(b, a));
    }
}

#[test]
fn lossless_aperture_respects_the_area_bound() {
    let layout = ApertureLayout::new(10, 10, 0.03).unwrap();
    let ctx = PropagationContext::default();
    let table = UnitCellStateTable::lossless();
    let bound = 10.0 * (4.0 * std::f64::consts::PI * layout.area() / ctx.wavelength().powi(2)).log10() + 0.5;
    let uv = UvGrid::square(201).unwrap();
    let patterns = [
        PhasePattern::uniform(&layout, State::S0),
        PhasePattern::from_bits(&layout, 0xdead_beef_cafe_f00d),
        PhasePattern::from_bits(&layout, 0x0f0f_0f0f_0f0f_0f0f),
    ];
    for p in &patterns {
        let ff = far_field_direct(&ctx, &Excitation::normal_incidence(), &layout, p, &table, &uv).unwrap();
        let d = directivity(&ff).unwrap().dbi;
        assert!(d <= bound, "{d} dBi exceeds {bound}");
    }
}
