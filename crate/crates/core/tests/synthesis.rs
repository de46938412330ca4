use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_core::field::{element_contributions, far_field_direct, field_from_contributions, PropagationContext};
use ris_core::synthesis::{
    greedy_flip_optimize, mse_objective, optimize_with_contributions, quantized_steering_code, MaskTarget,
    OptimizerConfig, TargetSpec,
};
use ris_core::{ApertureLayout, Excitation, PhasePattern, PlaneGrid, UnitCellStateTable, UvGrid};

fn random_mask(rng: &mut ChaCha8Rng, layout: &ApertureLayout) -> MaskTarget {
    let grid = PlaneGrid::new(3, 3, 0.04, 0.2).unwrap();
    let scale = layout.len() as f64;
    let mag = Array2::from_shape_fn((3, 3), |_| rng.random_range(0.0..scale));
    MaskTarget::new(grid, mag).unwrap()
}

/// Exhaustive minimum and whether `pattern` is a strict single-flip local optimum.
fn audit(layout: &ApertureLayout, mask: &MaskTarget, pattern: &PhasePattern) -> (f64, f64, bool) {
    let ctx = PropagationContext::default();
    let table = UnitCellStateTable::default();
    let contribs = element_contributions(&ctx, &Excitation::normal_incidence(), layout, &mask.grid).unwrap();
    let obj = |p: &PhasePattern| mse_objective(&field_from_contributions(&contribs, p, &table).unwrap(), mask).unwrap();
    let global = (0..1u64 << layout.len())
        .map(|b| obj(&PhasePattern::from_bits(layout, b)))
        .fold(f64::INFINITY, f64::min);
    let here = obj(pattern);
    let local = (0..layout.len()).all(|m| {
        let mut q = pattern.clone();
        q.flip(m);
        obj(&q) >= here * (1.0 - 1e-12)
    });
    (global, here, local)
}

#[test]
fn greedy_is_globally_or_locally_optimal_on_small_layouts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let ctx = PropagationContext::default();
    let table = UnitCellStateTable::default();
    let exc = Excitation::normal_incidence();
    for (n, trials) in [(2usize, 10), (3, 20)] {
        let layout = ApertureLayout::new(n, n, 0.03).unwrap();
        let (mut global_hits, mut local_only) = (0, 0);
        for t in 0..trials {
            let mask = random_mask(&mut rng, &layout);
            let cfg = OptimizerConfig::for_layout(&layout, t as u64);
            let contribs = element_contributions(&ctx, &exc, &layout, &mask.grid).unwrap();
            let (p, trace) = optimize_with_contributions(&contribs, &layout, &mask, &table, &cfg).unwrap();
            let acc = trace.accepted_objectives();
            assert!(acc.windows(2).all(|w| w[1] < w[0]));
            let (global, here, local) = audit(&layout, &mask, &p);
            assert!((here - trace.final_objective).abs() <= 1e-9 * here.max(1.0));
            if (here - global).abs() <= 1e-9 * global.max(1.0) {
                global_hits += 1;
            } else {
                assert!(local, "{n}x{n} trial {t}: stalled off a local optimum ({here} vs {global})");
                local_only += 1;
            }
        }
        println!("{n}x{n}: {global_hits} global, {local_only} local-only");
    }
}

#[test]
fn rerunning_from_the_result_accepts_nothing() {
    let layout = ApertureLayout::new(6, 6, 0.03).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mask = random_mask(&mut rng, &layout);
    let target = TargetSpec::mask(mask).unwrap();
    let ctx = PropagationContext::default();
    let table = UnitCellStateTable::default();
    let exc = Excitation::normal_incidence();
    let cfg = OptimizerConfig::for_layout(&layout, 1);
    let (p, _) = greedy_flip_optimize(&ctx, &exc, &layout, &table, &target, &cfg).unwrap();
    let again = OptimizerConfig { initial: Some(p.clone()), seed: 77, ..cfg };
    let (q, trace) = greedy_flip_optimize(&ctx, &exc, &layout, &table, &target, &again).unwrap();
    assert_eq!(trace.accepted_count(), 0);
    assert_eq!(p, q);
}

fn near(a: (f64, f64), b: (f64, f64), cell: f64) -> bool {
    (a.0 - b.0).abs() <= cell + 1e-9 && (a.1 - b.1).abs() <= cell + 1e-9
}

#[test]
fn steering_codes_point_their_beam_and_image() {
    let layout = ApertureLayout::prototype();
    let ctx = PropagationContext::default();
    let table = UnitCellStateTable::default();
    let exc = Excitation::normal_incidence();
    let uv = UvGrid::aperture_matched(layout.width(), layout.height(), ctx.wavelength()).unwrap();
    for phi_deg in [0.0f64, 30.0, 90.0] {
        for step in 0..=20 {
            let theta = (10.0 + 2.5 * step as f64).to_radians();
            let phi = phi_deg.to_radians();
            let code = quantized_steering_code(&ctx, &layout, &table, &exc, theta, phi).unwrap();
            let ff = far_field_direct(&ctx, &exc, &layout, &code, &table, &uv).unwrap();
            let target = (theta.sin() * phi.cos(), theta.sin() * phi.sin());
            let image = (-target.0, -target.1);
            let lobes = ff.lobes(-30.0);
            let top: Vec<(f64, f64)> = lobes.iter().take(2).map(|l| (l.u, l.v)).collect();
            let hit = |p| top.iter().any(|&q| near(q, p, uv.du));
            assert!(hit(target) && hit(image), "theta {:.1} phi {phi_deg}: top lobes {top:?}", theta.to_degrees());
            assert!((lobes[0].level_db - lobes[1].level_db).abs() < 1.0);
        }
    }
}
