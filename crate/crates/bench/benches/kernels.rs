use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use peakon_core::initial::random_band_limited;
use peakon_core::integrator::step_rk4;
use peakon_core::{make_grid, BFamilyParams, Dynamics, Form, SpectralWorkspace, State};

const SIZES: [usize; 3] = [1024, 8192, 65536];

fn green_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("green_apply");
    for n in SIZES {
        let grid = make_grid(64.0, n).unwrap();
        let ws = SpectralWorkspace::new(&grid);
        let f = random_band_limited(&grid, n / 8, 1.0, 7).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| {
            b.iter(|| ws.green_apply(black_box(f)).unwrap())
        });
    }
    group.finish();
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for n in SIZES {
        let grid = make_grid(64.0, n).unwrap();
        let dynamics = Dynamics::new(&grid, BFamilyParams::new(2.5, Form::UForm).unwrap());
        let u = random_band_limited(&grid, n / 8, 1.0, 7).unwrap();
        group.bench_with_input(BenchmarkId::new("u_form", n), &u, |b, u| {
            b.iter(|| dynamics.rhs_u(black_box(u), 0.0).unwrap())
        });
        let m = dynamics.workspace().helmholtz_forward(&u).unwrap();
        group.bench_with_input(BenchmarkId::new("m_form", n), &m, |b, m| {
            b.iter(|| dynamics.rhs_m(black_box(m), 0.0).unwrap())
        });
    }
    group.finish();
}

fn rk4_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("rk4_step");
    for n in SIZES {
        let grid = make_grid(64.0, n).unwrap();
        let dynamics = Dynamics::new(&grid, BFamilyParams::ch(Form::UForm));
        let state = State::from_u(
            random_band_limited(&grid, n / 8, 1.0, 7).unwrap(),
            Form::UForm,
        )
        .unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &state, |b, s| {
            b.iter(|| step_rk4(black_box(s), 1e-3, |st| dynamics.rhs(st)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, green_apply, rhs, rk4_step);
criterion_main!(benches);
