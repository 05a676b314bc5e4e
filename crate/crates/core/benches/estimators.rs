//! Backend comparison for the data-parallel kernels.
//!
//! With the default `parallel` feature each kernel runs on a one-thread rayon
//! pool and on the full pool. Build with `--no-default-features` to time the
//! sequential fallback under the same benchmark names:
//!
//! ```text
//! cargo bench -p rotset-core --bench estimators
//! cargo bench -p rotset-core --bench estimators --no-default-features
//! ```

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rotset::dynamics::ShearAxis;
use rotset::par;
use rotset::pushforward::{build_pushforward, discontinuity_certificate, CertificateParams};
use rotset::rotation::{classical_rotation_set, doubling_ladder, zaction_rotation_set, ZActionProblem};
use rotset::{IntMatrix3, Rect, TorusLift};

fn two_wave() -> TorusLift {
    TorusLift::two_wave(0.3, 0.1, 0.05, 0.08).unwrap()
}

fn kernels() -> Vec<(&'static str, Box<dyn Fn() + Send + Sync>)> {
    let shear = TorusLift::skew_shear(ShearAxis::Vertical, 0.0, vec![0.5, -0.5]).unwrap();
    let ladder = doubling_ladder(64);
    let classical = {
        let f = two_wave();
        let ladder = ladder.clone();
        Box::new(move || {
            classical_rotation_set(&f, &ladder, 128).unwrap();
        }) as Box<dyn Fn() + Send + Sync>
    };
    let zaction = {
        let prob = ZActionProblem { k_grid: 32, ..ZActionProblem::standard(shear, 48, Rect::new(-0.5, 0.5, -0.5, 1.5)) };
        Box::new(move || {
            zaction_rotation_set(&prob).unwrap();
        }) as Box<dyn Fn() + Send + Sync>
    };
    let certificate = {
        let f = two_wave();
        let l = IntMatrix3::unimodular([[1, 0, 0], [0, 1, 0], [-1, 0, 1]]).unwrap();
        let sys = build_pushforward(&f, &l).unwrap();
        let rho = classical_rotation_set(&f, &ladder, 32).unwrap();
        let params = CertificateParams { k_scan: 64, grid_n: 64, ..Default::default() };
        Box::new(move || {
            discontinuity_certificate(&sys, &rho, &params).unwrap();
        }) as Box<dyn Fn() + Send + Sync>
    };
    vec![("classical", classical), ("zaction", zaction), ("certificate", certificate)]
}

#[cfg(feature = "parallel")]
fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let full = rayon::current_num_threads();
    let mut sizes = vec![1];
    if full > 1 {
        sizes.push(full);
    }
    sizes
        .into_iter()
        .map(|n| (format!("{}-{n}", par::BACKEND), rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()))
        .collect()
}

fn backends(c: &mut Criterion) {
    for (name, run) in kernels() {
        let mut group = c.benchmark_group(name);
        group.sample_size(10);
        #[cfg(feature = "parallel")]
        for (label, pool) in pools() {
            group.bench_function(BenchmarkId::from_parameter(label), |b| b.iter(|| pool.install(&run)));
        }
        #[cfg(not(feature = "parallel"))]
        group.bench_function(BenchmarkId::from_parameter(par::BACKEND), |b| b.iter(&run));
        group.finish();
    }
}

criterion_group!(benches, backends);
criterion_main!(benches);
