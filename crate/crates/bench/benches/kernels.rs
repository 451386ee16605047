use criterion::{black_box, criterion_group, criterion_main, Criterion};
use msa_lab::montecarlo::{singular_set_measure, BoundaryGreen, EnergyInterval};
use msa_lab::msa::{classify_singular, classify_tunneling, TunnelingMode};
use msa_lab::operator::{eigendecompose, spectrum};
use msa_lab::{Ball, ScaleParams};
use msa_lab_bench::{hosts, realization};

fn diagonalisation(c: &mut Criterion) {
    for (name, g) in hosts() {
        let h = realization(&g, 1).full_hamiltonian().unwrap();
        c.bench_function(&format!("eigendecompose/{name}"), |b| b.iter(|| eigendecompose(black_box(&h)).unwrap()));
        c.bench_function(&format!("spectrum/{name}"), |b| b.iter(|| spectrum(black_box(&h)).unwrap()));
    }
}

fn classification(c: &mut Criterion) {
    let (_, g) = hosts().remove(0);
    let p = ScaleParams::section2(1.0, 16);
    c.bench_function("classify_singular/L16", |b| {
        b.iter(|| {
            let r = realization(&g, 2);
            let s = r.ball_spectrum(64, 16).unwrap();
            classify_singular(&s, &g, Ball::new(64, 16), black_box(7.0), &p, 3.0).unwrap()
        })
    });
    c.bench_function("classify_tunneling/L8_in_L40", |b| {
        b.iter(|| {
            let r = realization(&g, 3);
            classify_tunneling(&r, Ball::new(64, 40), black_box(7.0), &p, 8, TunnelingMode::Pairwise, 3.0).unwrap()
        })
    });
}

fn singular_sets(c: &mut Criterion) {
    let (_, g) = hosts().remove(0);
    let r = realization(&g, 4);
    let s = r.ball_spectrum(64, 16).unwrap();
    let m = BoundaryGreen::new(&g, &s, 64).unwrap();
    let i = EnergyInterval::new(4.0, 5.0).unwrap();
    c.bench_function("singular_set_measure/h=1e-3", |b| b.iter(|| singular_set_measure(&m, black_box(1e-3), i, 1e-3).unwrap()));
}

criterion_group!(benches, diagonalisation, classification, singular_sets);
criterion_main!(benches);
