use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ndarray::Array2;

use ris_core::control::{decode_frame, encode_frame, ControlFrame, DEFAULT_TOLERANCE};
use ris_core::field::{element_contributions, far_field_direct, field_from_contributions, PropagationContext};
use ris_core::synthesis::{optimize_with_contributions, quantized_steering_code, MaskTarget, OptimizerConfig};
use ris_core::{ApertureLayout, Excitation, PhasePattern, PlaneGrid, State, UnitCellStateTable, UvGrid};

fn setup() -> (PropagationContext, ApertureLayout, UnitCellStateTable, Excitation) {
    (PropagationContext::default(), ApertureLayout::prototype(), UnitCellStateTable::default(), Excitation::normal_incidence())
}

fn plane_field(c: &mut Criterion) {
    let (ctx, layout, table, exc) = setup();
    let grid = PlaneGrid::covering(0.4, 0.01, 0.7).unwrap();
    let pattern = PhasePattern::uniform(&layout, State::S1);
    c.bench_function("contributions 400 x 41x41", |b| {
        b.iter(|| element_contributions(&ctx, &exc, &layout, black_box(&grid)).unwrap())
    });
    let contribs = element_contributions(&ctx, &exc, &layout, &grid).unwrap();
    c.bench_function("plane field from contributions", |b| {
        b.iter(|| field_from_contributions(&contribs, black_box(&pattern), &table).unwrap())
    });
}

fn far_field(c: &mut Criterion) {
    let (ctx, layout, table, exc) = setup();
    let pattern = quantized_steering_code(&ctx, &layout, &table, &exc, 30f64.to_radians(), 0.0).unwrap();
    let grid = UvGrid::default();
    c.bench_function("far field direct 201x201", |b| {
        b.iter(|| far_field_direct(&ctx, &exc, &layout, black_box(&pattern), &table, &grid).unwrap())
    });
}

fn greedy(c: &mut Criterion) {
    let (ctx, layout, table, exc) = setup();
    let grid = PlaneGrid::covering(0.4, 0.02, 0.7).unwrap();
    let mask = MaskTarget::new(grid, ndarray_mask(grid.rows, grid.cols)).unwrap();
    let contribs = element_contributions(&ctx, &exc, &layout, &grid).unwrap();
    let reference = field_from_contributions(&contribs, &PhasePattern::uniform(&layout, State::S1), &table).unwrap();
    let mask = mask.normalized_to_field(&reference).unwrap();
    let mut group = c.benchmark_group("greedy");
    group.sample_size(10);
    group.bench_function("20x20 onto 21x21 mask", |b| {
        b.iter(|| {
            let cfg = OptimizerConfig::for_layout(&layout, 1);
            optimize_with_contributions(&contribs, &layout, black_box(&mask), &table, &cfg).unwrap()
        })
    });
    group.finish();
}

/// Centred square of ones.
fn ndarray_mask(rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |(r, c)| {
        let inside = |i: usize, n: usize| i >= n / 4 && i < 3 * n / 4;
        if inside(r, rows) && inside(c, cols) {
            1.0
        } else {
            0.0
        }
    })
}

fn codec(c: &mut Criterion) {
    let frames: Vec<ControlFrame> = (0..128u8).map(|a| ControlFrame::new(a, a % 16).unwrap()).collect();
    c.bench_function("encode+decode 128 frames", |b| {
        b.iter(|| {
            for f in &frames {
                let w = encode_frame(black_box(f));
                black_box(decode_frame(&w, DEFAULT_TOLERANCE).unwrap());
            }
        })
    });
}

criterion_group!(benches, plane_field, far_field, greedy, codec);
criterion_main!(benches);
