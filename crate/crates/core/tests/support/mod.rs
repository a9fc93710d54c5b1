//! Monte-Carlo and finite-difference oracles shared by the integration tests
//! and the acceptance target.
#![allow(dead_code)]

use pinn_cert_core::activation::{tanh, tanh_d1, tanh_d2};
use pinn_cert_core::certify::collect_atom_bounds;
use pinn_cert_core::derivative::{
    bound_first_with, bound_second_with, BoundConfig, JacobianBounds,
};
use pinn_cert_core::linear::{crown_propagate, InputBox, Interval};
use pinn_cert_core::network::DenseNetwork;
use pinn_cert_core::pde::{build_pde, PdeName};
use pinn_cert_core::relax::{
    neg_sin_pi, relax_neg_sin_pi, relax_tanh, relax_tanh_prime, relax_tanh_second, relax_two_sech,
    relax_x2_cos_pi, two_sech, x2_cos_pi, LinRelax, RelaxError,
};
use pinn_cert_core::residual::bound_residual;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Slack for floating-point rounding in containment checks.
pub const SLACK: f64 = 1e-9;

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// 2 to 5 hidden layers of width 4 to 20.
pub fn random_net(r: &mut impl Rng, d0: usize, outputs: usize) -> DenseNetwork {
    let mut dims = vec![d0];
    for _ in 0..r.gen_range(2..=5) {
        dims.push(r.gen_range(4..=20));
    }
    dims.push(outputs);
    let gain = r.gen_range(0.5..1.5);
    DenseNetwork::random(&dims, gain, r.gen())
}

pub fn random_box(r: &mut impl Rng, d0: usize) -> InputBox {
    let lo: Vec<f64> = (0..d0).map(|_| r.gen_range(-2.0..1.0)).collect();
    let hi = lo.iter().map(|l| l + r.gen_range(0.01..1.5)).collect();
    InputBox::new(lo, hi).unwrap()
}

pub fn sample(r: &mut impl Rng, b: &InputBox) -> Vec<f64> {
    (0..b.dim())
        .map(|i| {
            if b.is_degenerate(i) {
                b.lo()[i]
            } else {
                r.gen_range(b.lo()[i]..=b.hi()[i])
            }
        })
        .collect()
}

#[derive(Debug, Default)]
pub struct Tally {
    pub checks: usize,
    pub violations: Vec<String>,
    pub worst: f64,
}

impl Tally {
    /// Records whether the sampled extremes lie inside the certified interval.
    pub fn check(&mut self, what: impl FnOnce() -> String, certified: Interval, sampled: Interval) {
        self.checks += 1;
        let excess = (certified.lo - sampled.lo).max(sampled.hi - certified.hi);
        let scale = 1.0 + sampled.lo.abs().max(sampled.hi.abs());
        self.worst = self.worst.max(excess / scale);
        if excess > SLACK * scale {
            self.violations.push(format!(
                "{}: certified {certified:?}, sampled {sampled:?}",
                what()
            ));
        }
    }

    pub fn merge(&mut self, other: Tally) {
        self.checks += other.checks;
        self.violations.extend(other.violations);
        self.worst = self.worst.max(other.worst);
    }
}

struct Extremes(Vec<Interval>);

impl Extremes {
    fn new(n: usize) -> Self {
        Extremes(vec![
            Interval {
                lo: f64::INFINITY,
                hi: f64::NEG_INFINITY,
            };
            n
        ])
    }

    fn push(&mut self, k: usize, v: f64) {
        let e = &mut self.0[k];
        e.lo = e.lo.min(v);
        e.hi = e.hi.max(v);
    }
}

/// One random network and box: output, first and second derivative bounds
/// along every coordinate against the extremes of `samples` exact evaluations.
pub fn network_soundness(seed: u64, samples: usize) -> Tally {
    let mut r = rng(seed, 0);
    let d0 = r.gen_range(1..=3);
    let outputs = 2;
    let net = random_net(&mut r, d0, outputs);
    let b = random_box(&mut r, d0);
    let cfg = BoundConfig::default();
    let lb = crown_propagate(&net, &b).unwrap();
    let jac = JacobianBounds::new(&net, &lb, &cfg).unwrap();
    let mut firsts = Vec::new();
    let mut seconds = Vec::new();
    for i in 0..d0 {
        let f = bound_first_with(&net, &lb, &jac, i, &cfg).unwrap();
        seconds.push(bound_second_with(&net, &lb, &jac, &f, &cfg).unwrap());
        firsts.push(f);
    }
    // per output: value, then (first, second) per coordinate
    let per = 1 + 2 * d0;
    let mut ext = Extremes::new(outputs * per);
    let mut s = rng(seed, 1);
    for _ in 0..samples {
        let x = sample(&mut s, &b);
        for i in 0..d0 {
            let jet = net.jet(&x, i).unwrap();
            for j in 0..outputs {
                if i == 0 {
                    ext.push(j * per, jet.value[j]);
                }
                ext.push(j * per + 1 + 2 * i, jet.first[j]);
                ext.push(j * per + 2 + 2 * i, jet.second[j]);
            }
        }
    }
    let mut t = Tally::default();
    for j in 0..outputs {
        t.check(
            || format!("seed {seed} u[{j}]"),
            lb.output().interval(j),
            ext.0[j * per],
        );
        for i in 0..d0 {
            t.check(
                || format!("seed {seed} du[{j}]/dx{i}"),
                firsts[i].interval(j),
                ext.0[j * per + 1 + 2 * i],
            );
            t.check(
                || format!("seed {seed} d2u[{j}]/dx{i}2"),
                seconds[i].interval(j),
                ext.0[j * per + 2 + 2 * i],
            );
        }
    }
    t
}

/// Residual expressions of three PDEs on a random two-input, two-output network.
pub fn residual_soundness(seed: u64, samples: usize) -> Tally {
    let mut r = rng(seed, 2);
    let net = random_net(&mut r, 2, 2);
    let b = random_box(&mut r, 2);
    let cfg = BoundConfig::default();
    let mut tags = Vec::new();
    let mut exprs = Vec::new();
    let mut certified = Vec::new();
    for name in [PdeName::Burgers, PdeName::AllenCahn, PdeName::Schrodinger] {
        let es = build_pde(name).residuals;
        let atoms = collect_atom_bounds(&net, &es, &b, &cfg).unwrap();
        for (k, e) in es.into_iter().enumerate() {
            certified.push(bound_residual(&e, &atoms, &b, &cfg).unwrap());
            tags.push(format!("{name} residual[{k}]"));
            exprs.push(e);
        }
    }
    let mut ext = Extremes::new(exprs.len());
    let mut s = rng(seed, 3);
    for _ in 0..samples {
        let x = sample(&mut s, &b);
        let jets = vec![Some(net.jet(&x, 0).unwrap()), Some(net.jet(&x, 1).unwrap())];
        for (k, e) in exprs.iter().enumerate() {
            ext.push(k, e.eval_jets(&jets));
        }
    }
    let mut t = Tally::default();
    for (k, c) in certified.into_iter().enumerate() {
        t.check(|| format!("seed {seed} {}", tags[k]), c, ext.0[k]);
    }
    t
}

/// Largest relative finite-difference mismatch of the first and second
/// derivative oracles on one random (network, point, coordinate) triple.
/// Errors are relative to `max(|exact|, 1)`.
pub fn derivative_fd_error(seed: u64) -> (f64, f64) {
    let mut r = rng(seed, 4);
    let d0 = r.gen_range(1..=3);
    let outputs = r.gen_range(1..=2);
    let net = random_net(&mut r, d0, outputs);
    let x: Vec<f64> = (0..d0).map(|_| r.gen_range(-2.0..2.0)).collect();
    let i = r.gen_range(0..d0);
    let d1 = net.exact_first_derivative(&x, i).unwrap();
    let d2 = net.exact_second_derivative(&x, i).unwrap();
    let at = |dx: f64| {
        let mut y = x.clone();
        y[i] += dx;
        net.forward(&y).unwrap()
    };
    let (h1, h2) = (1e-5, 1e-4);
    let (p1, m1) = (at(h1), at(-h1));
    let (p2, m2, c) = (at(h2), at(-h2), at(0.0));
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for j in 0..outputs {
        let fd1 = (p1[j] - m1[j]) / (2.0 * h1);
        let fd2 = (p2[j] - 2.0 * c[j] + m2[j]) / (h2 * h2);
        e1 = e1.max((fd1 - d1[j]).abs() / d1[j].abs().max(1.0));
        e2 = e2.max((fd2 - d2[j]).abs() / d2[j].abs().max(1.0));
    }
    (e1, e2)
}

pub struct Family {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub relax: fn(f64, f64) -> Result<LinRelax, RelaxError>,
    pub domain: (f64, f64),
}

pub fn families() -> Vec<Family> {
    vec![
        Family {
            name: "tanh",
            f: tanh,
            relax: relax_tanh,
            domain: (-8.0, 8.0),
        },
        Family {
            name: "tanh'",
            f: tanh_d1,
            relax: relax_tanh_prime,
            domain: (-8.0, 8.0),
        },
        Family {
            name: "tanh''",
            f: tanh_d2,
            relax: relax_tanh_second,
            domain: (-8.0, 8.0),
        },
        Family {
            name: "-sin(pi x)",
            f: neg_sin_pi,
            relax: relax_neg_sin_pi,
            domain: (-1.0, 1.0),
        },
        Family {
            name: "2 sech",
            f: two_sech,
            relax: relax_two_sech,
            domain: (-8.0, 8.0),
        },
        Family {
            name: "x^2 cos(pi x)",
            f: x2_cos_pi,
            relax: relax_x2_cos_pi,
            domain: (-1.0, 1.0),
        },
    ]
}

/// Largest amount by which `f` leaves its relaxation on `points`-point grids
/// over `intervals` random intervals (widths log-uniform in [1e-6, span]).
pub fn relaxation_violation(fam: &Family, intervals: usize, points: usize, seed: u64) -> f64 {
    let mut r = rng(seed, 5);
    let (a, b) = fam.domain;
    let mut worst = 0.0f64;
    for k in 0..intervals {
        let (l, u) = if k % 50 == 0 {
            let p = r.gen_range(a..=b);
            (p, p)
        } else {
            let w = (b - a) * 10f64.powf(r.gen_range(-6.0..0.0));
            let l = r.gen_range(a..=b - w);
            (l, (l + w).min(b))
        };
        let rel = (fam.relax)(l, u).unwrap_or_else(|e| panic!("{} on [{l}, {u}]: {e}", fam.name));
        for p in 0..points {
            let y = if points == 1 {
                l
            } else {
                l + (u - l) * p as f64 / (points - 1) as f64
            };
            let v = (fam.f)(y);
            worst = worst.max(rel.lower.eval(y) - v).max(v - rel.upper.eval(y));
        }
    }
    worst
}

/// Largest relative distance between every bound pipeline and the exact value at a
/// degenerate box, measured by `max(|lo − v|, |hi − v|) / max(|v|, 1)`.
pub fn point_tightness(seed: u64) -> f64 {
    let mut r = rng(seed, 6);
    let net = random_net(&mut r, 2, 2);
    let x = vec![r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5)];
    let b = InputBox::point(&x).unwrap();
    let cfg = BoundConfig::default();
    let lb = crown_propagate(&net, &b).unwrap();
    let jac = JacobianBounds::new(&net, &lb, &cfg).unwrap();
    let dist = |iv: Interval, v: f64| (iv.lo - v).abs().max((iv.hi - v).abs()) / v.abs().max(1.0);
    let mut worst = 0.0f64;
    let jets = [net.jet(&x, 0).unwrap(), net.jet(&x, 1).unwrap()];
    for (i, jet) in jets.iter().enumerate() {
        let f = bound_first_with(&net, &lb, &jac, i, &cfg).unwrap();
        let s = bound_second_with(&net, &lb, &jac, &f, &cfg).unwrap();
        for j in 0..2 {
            worst = worst
                .max(dist(lb.output().interval(j), jet.value[j]))
                .max(dist(f.interval(j), jet.first[j]))
                .max(dist(s.interval(j), jet.second[j]));
        }
    }
    let jets: Vec<_> = jets.into_iter().map(Some).collect();
    for name in [PdeName::Burgers, PdeName::AllenCahn, PdeName::Schrodinger] {
        let exprs = build_pde(name).residuals;
        let atoms = collect_atom_bounds(&net, &exprs, &b, &cfg).unwrap();
        for e in &exprs {
            worst = worst.max(dist(
                bound_residual(e, &atoms, &b, &cfg).unwrap(),
                e.eval_jets(&jets),
            ));
        }
    }
    worst
}
