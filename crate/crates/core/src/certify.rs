//! Certificates for the initial, boundary and residual conditions of a PDE.
//!
//! Each condition is a nonnegative loss (sum of squared errors over the
//! outputs involved) whose maximum over a face or the whole domain is
//! bounded by greedy branching.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::branching::{greedy_branch, BranchConfig, BranchError, BranchReport};
use crate::derivative::{
    bound_first_with, bound_second_with, BoundConfig, FirstDerivBounds, JacobianBounds,
    SecondDerivBounds,
};
use crate::linear::{concretize, crown_propagate, AffineBounds, BoundError, InputBox, Interval};
use crate::network::{DenseNetwork, NetworkError};
use crate::pde::{BoundaryCondition, InitialCondition, PdeProblem};
use crate::residual::{bound_residual, Atom, AtomBound, AtomBounds, Monomial, ResidualExpr};

pub const CERTIFICATE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error("network has {found} inputs and {outputs} outputs, the {pde} problem needs 2 and {expected}")]
    Shape {
        pde: String,
        found: usize,
        outputs: usize,
        expected: usize,
    },
    #[error("the {0} problem has no condition `{1}`")]
    NoCondition(String, String),
    #[error("the {0} problem is certified through its initial and boundary conditions only; it has no residual expression")]
    NoResidual(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub initial: f64,
    pub boundary: f64,
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            initial: 1e-3,
            boundary: 1e-3,
            residual: 1e-1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyConfig {
    pub n_b: usize,
    pub n_s: usize,
    pub seed: u64,
    pub bound: BoundConfig,
    pub tolerances: Tolerances,
}

impl CertifyConfig {
    pub fn new(n_b: usize, n_s: usize, seed: u64) -> Self {
        CertifyConfig {
            n_b,
            n_s,
            seed,
            bound: BoundConfig::default(),
            tolerances: Tolerances::default(),
        }
    }

    fn branch(&self) -> BranchConfig {
        BranchConfig::new(self.n_b, self.n_s, self.seed)
    }
}

/// Which conditions to certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionSelect {
    All,
    Initial,
    Boundary,
    Residual,
}

impl std::str::FromStr for ConditionSelect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(ConditionSelect::All),
            "initial" => Ok(ConditionSelect::Initial),
            "boundary" => Ok(ConditionSelect::Boundary),
            "residual" => Ok(ConditionSelect::Residual),
            other => Err(format!(
                "unknown condition `{other}` (expected all, initial, boundary or residual)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub tag: String,
    pub certified: f64,
    pub empirical: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub nb: usize,
    pub ns: usize,
    pub seed: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ConditionRun {
    pub result: ConditionResult,
    pub report: BranchReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub net_sha256: String,
    pub pde: String,
    pub conditions: Vec<ConditionResult>,
    pub pass: bool,
}

impl Certificate {
    pub fn new(net_sha256: String, pde: &str, conditions: Vec<ConditionResult>) -> Self {
        let pass = conditions.iter().all(|c| c.pass);
        Certificate {
            version: CERTIFICATE_VERSION,
            net_sha256,
            pde: pde.to_string(),
            conditions,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes).as_slice())
}

fn check_shape(net: &DenseNetwork, pde: &PdeProblem) -> Result<(), CertifyError> {
    if net.input_dim() != 2 || net.output_dim() != pde.outputs {
        return Err(CertifyError::Shape {
            pde: pde.name.to_string(),
            found: net.input_dim(),
            outputs: net.output_dim(),
            expected: pde.outputs,
        });
    }
    Ok(())
}

/// Range of `Σⱼ eⱼ²` given enclosures of each `eⱼ`.
fn sum_of_squares(errors: impl IntoIterator<Item = Interval>) -> Interval {
    errors
        .into_iter()
        .fold(Interval::point(0.0), |acc, e| acc.add(&e.square()))
}

/// Encloses `Σⱼ (uⱼ(t₀, x) − targetⱼ(x))²` over an initial-face box.
pub fn bound_initial_loss(
    net: &DenseNetwork,
    ic: &InitialCondition,
    b: &InputBox,
) -> Result<Interval, BoundError> {
    let lb = crown_propagate(net, b)?;
    let out = lb.output();
    let xi = b.interval(ic.coord);
    let mut errors = Vec::with_capacity(ic.targets.len());
    for (j, target) in ic.targets.iter().enumerate() {
        let r = target.relax(xi.lo, xi.hi)?;
        let mut upper = out.upper.coeffs.row(j).to_owned();
        upper[ic.coord] -= r.lower.slope;
        let upper_off = out.upper.offset[j] - r.lower.intercept;
        let mut lower = out.lower.coeffs.row(j).to_owned();
        lower[ic.coord] -= r.upper.slope;
        let lower_off = out.lower.offset[j] - r.upper.intercept;
        errors.push(concretize(
            (lower.view(), lower_off),
            (upper.view(), upper_off),
            b,
        )?);
    }
    Ok(sum_of_squares(errors))
}

pub fn initial_loss(
    net: &DenseNetwork,
    ic: &InitialCondition,
    x: &[f64],
) -> Result<f64, NetworkError> {
    let y = net.forward(x)?;
    Ok(ic
        .targets
        .iter()
        .enumerate()
        .map(|(j, t)| (y[j] - t.eval(x[ic.coord])).powi(2))
        .sum())
}

fn robin_expr(
    output: usize,
    coord: usize,
    value_coef: f64,
    deriv_coef: f64,
    target: f64,
) -> ResidualExpr {
    let mut terms = vec![Monomial::new(value_coef, vec![Atom::Value { output }])];
    if deriv_coef != 0.0 {
        terms.push(Monomial::new(
            deriv_coef,
            vec![Atom::First { output, coord }],
        ));
    }
    terms.push(Monomial::new(-target, vec![]));
    ResidualExpr::new(terms).expect("finite coefficients")
}

/// Moves the contribution of a coordinate fixed at `at` into the offset.
fn fold_fixed(coeffs: ArrayView1<f64>, offset: f64, coord: usize, at: f64) -> (Array1<f64>, f64) {
    let mut c = coeffs.to_owned();
    let off = offset + c[coord] * at;
    c[coord] = 0.0;
    (c, off)
}

fn periodic_rows(
    net: &DenseNetwork,
    b: &InputBox,
    derivative: bool,
    coord: usize,
    cfg: &BoundConfig,
) -> Result<AffineBounds, BoundError> {
    let lb = crown_propagate(net, b)?;
    if !derivative {
        return Ok(lb.output().clone());
    }
    let jac = JacobianBounds::new(net, &lb, cfg)?;
    Ok(bound_first_with(net, &lb, &jac, coord, cfg)?.output)
}

/// Encloses the loss of one boundary condition over a box on its face.
/// For a periodic condition the box lies on the `lo` face and is mirrored to `hi`.
pub fn bound_boundary_loss(
    net: &DenseNetwork,
    bc: &BoundaryCondition,
    b: &InputBox,
    cfg: &BoundConfig,
) -> Result<Interval, BoundError> {
    match bc {
        &BoundaryCondition::Robin {
            coord,
            output,
            value_coef,
            deriv_coef,
            target,
            ..
        } => {
            let lb = crown_propagate(net, b)?;
            let mut atoms = AtomBounds::new();
            atoms.insert(
                Atom::Value { output },
                AtomBound::from_bounds(lb.output(), output),
            );
            if deriv_coef != 0.0 {
                let jac = JacobianBounds::new(net, &lb, cfg)?;
                let first = bound_first_with(net, &lb, &jac, coord, cfg)?;
                atoms.insert(
                    Atom::First { output, coord },
                    AtomBound::from_bounds(&first.output, output),
                );
            }
            let expr = robin_expr(output, coord, value_coef, deriv_coef, target);
            Ok(bound_residual(&expr, &atoms, b, cfg)?.square())
        }
        BoundaryCondition::Periodic {
            coord,
            lo,
            hi,
            derivative,
            outputs,
        } => {
            let coord = *coord;
            let b_lo = b.with_coordinate(coord, *lo, *lo)?;
            let b_hi = b.with_coordinate(coord, *hi, *hi)?;
            let at_lo = periodic_rows(net, &b_lo, *derivative, coord, cfg)?;
            let at_hi = periodic_rows(net, &b_hi, *derivative, coord, cfg)?;
            let mut errors = Vec::with_capacity(outputs.len());
            for &j in outputs {
                let (hu, hu_off) =
                    fold_fixed(at_hi.upper.coeffs.row(j), at_hi.upper.offset[j], coord, *hi);
                let (hl, hl_off) =
                    fold_fixed(at_hi.lower.coeffs.row(j), at_hi.lower.offset[j], coord, *hi);
                let (lu, lu_off) =
                    fold_fixed(at_lo.upper.coeffs.row(j), at_lo.upper.offset[j], coord, *lo);
                let (ll, ll_off) =
                    fold_fixed(at_lo.lower.coeffs.row(j), at_lo.lower.offset[j], coord, *lo);
                let joint = concretize(
                    ((&hl - &lu).view(), hl_off - lu_off),
                    ((&hu - &ll).view(), hu_off - ll_off),
                    &b_lo,
                )?;
                errors.push(joint.intersect(&at_hi.interval(j).sub(&at_lo.interval(j))));
            }
            Ok(sum_of_squares(errors))
        }
    }
}

pub fn boundary_loss(
    net: &DenseNetwork,
    bc: &BoundaryCondition,
    x: &[f64],
) -> Result<f64, NetworkError> {
    match bc {
        &BoundaryCondition::Robin {
            coord,
            output,
            value_coef,
            deriv_coef,
            target,
            ..
        } => {
            let jet = net.jet(x, coord)?;
            Ok((value_coef * jet.value[output] + deriv_coef * jet.first[output] - target).powi(2))
        }
        BoundaryCondition::Periodic {
            coord,
            lo,
            hi,
            derivative,
            outputs,
        } => {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[*coord] = *lo;
            b[*coord] = *hi;
            let (ja, jb) = (net.jet(&a, *coord)?, net.jet(&b, *coord)?);
            let pick = |j: &crate::network::Jet, k: usize| {
                if *derivative {
                    j.first[k]
                } else {
                    j.value[k]
                }
            };
            Ok(outputs
                .iter()
                .map(|&k| (pick(&jb, k) - pick(&ja, k)).powi(2))
                .sum())
        }
    }
}

/// Affine bounds on every atom the expressions use, over one box.
pub fn collect_atom_bounds(
    net: &DenseNetwork,
    exprs: &[ResidualExpr],
    b: &InputBox,
    cfg: &BoundConfig,
) -> Result<AtomBounds, BoundError> {
    let atoms: BTreeSet<Atom> = exprs.iter().flat_map(ResidualExpr::atoms).collect();
    let lb = crown_propagate(net, b)?;
    let needs_first: BTreeSet<usize> = atoms.iter().filter_map(|a| a.coord()).collect();
    let jac = if needs_first.is_empty() {
        None
    } else {
        Some(JacobianBounds::new(net, &lb, cfg)?)
    };
    let mut firsts: Vec<Option<FirstDerivBounds>> = vec![None; b.dim()];
    for &i in &needs_first {
        firsts[i] = Some(bound_first_with(
            net,
            &lb,
            jac.as_ref().expect("built"),
            i,
            cfg,
        )?);
    }
    let mut seconds: Vec<Option<SecondDerivBounds>> = vec![None; b.dim()];
    let mut out = AtomBounds::new();
    for a in atoms {
        let bound = match a {
            Atom::Value { output } => AtomBound::from_bounds(lb.output(), output),
            Atom::First { output, coord } => {
                AtomBound::from_bounds(&firsts[coord].as_ref().expect("built").output, output)
            }
            Atom::Second { output, coord } => {
                if seconds[coord].is_none() {
                    let first = firsts[coord].as_ref().expect("built");
                    seconds[coord] = Some(bound_second_with(
                        net,
                        &lb,
                        jac.as_ref().expect("built"),
                        first,
                        cfg,
                    )?);
                }
                AtomBound::from_bounds(&seconds[coord].as_ref().expect("built").output, output)
            }
        };
        out.insert(a, bound);
    }
    Ok(out)
}

fn interval_eval(expr: &ResidualExpr, atoms: &AtomBounds) -> Interval {
    expr.terms.iter().fold(Interval::point(0.0), |acc, t| {
        let p = t
            .atoms
            .iter()
            .fold(Interval::point(1.0), |p, a| p.mul(&atoms[a].interval));
        acc.add(&p.scale(t.coeff))
    })
}

/// Encloses `Σ residual²` over a box of the domain.
pub fn bound_residual_loss(
    net: &DenseNetwork,
    exprs: &[ResidualExpr],
    b: &InputBox,
    cfg: &BoundConfig,
) -> Result<Interval, BoundError> {
    let atoms = collect_atom_bounds(net, exprs, b, cfg)?;
    let mut parts = Vec::with_capacity(exprs.len());
    for e in exprs {
        let r = bound_residual(e, &atoms, b, cfg)?;
        parts.push(r.intersect(&interval_eval(e, &atoms)));
    }
    Ok(sum_of_squares(parts))
}

pub fn residual_loss(
    net: &DenseNetwork,
    exprs: &[ResidualExpr],
    x: &[f64],
) -> Result<f64, NetworkError> {
    let mut jets = vec![None; x.len()];
    let coords: BTreeSet<usize> = exprs
        .iter()
        .flat_map(ResidualExpr::atoms)
        .filter_map(|a| a.coord())
        .chain([0])
        .collect();
    for i in coords {
        jets[i] = Some(net.jet(x, i)?);
    }
    Ok(exprs.iter().map(|e| e.eval_jets(&jets).powi(2)).sum())
}

fn finish(tag: String, tol: f64, cfg: &CertifyConfig, report: BranchReport) -> ConditionRun {
    let certified = report.global.hi;
    let result = ConditionResult {
        tag,
        certified,
        empirical: report.empirical.hi,
        tolerance: tol,
        pass: certified <= tol,
        nb: cfg.n_b,
        ns: cfg.n_s,
        seed: cfg.seed,
        seconds: report.seconds,
    };
    ConditionRun { result, report }
}

/// Sampling errors surface as non-finite values, which the sampler reports.
fn lift(r: Result<f64, NetworkError>) -> f64 {
    r.unwrap_or(f64::NAN)
}

pub fn verify_initial(
    net: &DenseNetwork,
    pde: &PdeProblem,
    cfg: &CertifyConfig,
) -> Result<ConditionRun, CertifyError> {
    check_shape(net, pde)?;
    let ic = pde
        .initial
        .as_ref()
        .ok_or_else(|| CertifyError::NoCondition(pde.name.to_string(), "initial".into()))?;
    let face = pde.initial_face().expect("initial condition present")?;
    let report = greedy_branch(
        |b: &InputBox| bound_initial_loss(net, ic, b),
        |x: &[f64]| lift(initial_loss(net, ic, x)),
        &face,
        &cfg.branch(),
    )?;
    Ok(finish(
        "initial".into(),
        cfg.tolerances.initial,
        cfg,
        report,
    ))
}

pub fn verify_boundary(
    net: &DenseNetwork,
    pde: &PdeProblem,
    k: usize,
    cfg: &CertifyConfig,
) -> Result<ConditionRun, CertifyError> {
    check_shape(net, pde)?;
    let bc = pde
        .boundaries
        .get(k)
        .ok_or_else(|| CertifyError::NoCondition(pde.name.to_string(), format!("boundary[{k}]")))?;
    let face = bc.face(&pde.domain)?;
    let report = greedy_branch(
        |b: &InputBox| bound_boundary_loss(net, bc, b, &cfg.bound),
        |x: &[f64]| lift(boundary_loss(net, bc, x)),
        &face,
        &cfg.branch(),
    )?;
    Ok(finish(
        format!("boundary[{k}]"),
        cfg.tolerances.boundary,
        cfg,
        report,
    ))
}

pub fn verify_residual(
    net: &DenseNetwork,
    pde: &PdeProblem,
    cfg: &CertifyConfig,
) -> Result<ConditionRun, CertifyError> {
    check_shape(net, pde)?;
    if pde.residuals.is_empty() {
        return Err(CertifyError::NoResidual(pde.name.to_string()));
    }
    let report = greedy_branch(
        |b: &InputBox| bound_residual_loss(net, &pde.residuals, b, &cfg.bound),
        |x: &[f64]| lift(residual_loss(net, &pde.residuals, x)),
        &pde.domain,
        &cfg.branch(),
    )?;
    Ok(finish(
        "residual".into(),
        cfg.tolerances.residual,
        cfg,
        report,
    ))
}

/// One run per boundary condition, in declaration order.
pub fn verify_boundaries(
    net: &DenseNetwork,
    pde: &PdeProblem,
    cfg: &CertifyConfig,
) -> Result<Vec<ConditionRun>, CertifyError> {
    if pde.boundaries.is_empty() {
        return Err(CertifyError::NoCondition(
            pde.name.to_string(),
            "boundary".into(),
        ));
    }
    (0..pde.boundaries.len())
        .map(|k| verify_boundary(net, pde, k, cfg))
        .collect()
}

/// Runs the selected conditions in a fixed order: initial, boundaries, residual.
/// Conditions the problem does not define are skipped under `All`.
pub fn verify(
    net: &DenseNetwork,
    pde: &PdeProblem,
    which: ConditionSelect,
    cfg: &CertifyConfig,
) -> Result<Vec<ConditionRun>, CertifyError> {
    let mut runs = Vec::new();
    let all = which == ConditionSelect::All;
    if all && pde.initial.is_some() || which == ConditionSelect::Initial {
        runs.push(verify_initial(net, pde, cfg)?);
    }
    if all && !pde.boundaries.is_empty() || which == ConditionSelect::Boundary {
        runs.extend(verify_boundaries(net, pde, cfg)?);
    }
    if all && !pde.residuals.is_empty() || which == ConditionSelect::Residual {
        runs.push(verify_residual(net, pde, cfg)?);
    }
    Ok(runs)
}

/// Quantity bounded by [`bound_quantity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Value,
    First(usize),
    Second(usize),
}

impl Quantity {
    pub fn at(&self, net: &DenseNetwork, x: &[f64], output: usize) -> Result<f64, NetworkError> {
        Ok(match *self {
            Quantity::Value => net.forward(x)?[output],
            Quantity::First(i) => net.jet(x, i)?.first[output],
            Quantity::Second(i) => net.jet(x, i)?.second[output],
        })
    }

    /// Enclosure of one output of the quantity over a box, without branching.
    pub fn bound(
        &self,
        net: &DenseNetwork,
        b: &InputBox,
        output: usize,
        cfg: &BoundConfig,
    ) -> Result<Interval, BoundError> {
        let lb = crown_propagate(net, b)?;
        if output >= net.output_dim() {
            return Err(BoundError::Dimension {
                expected: net.output_dim(),
                found: output + 1,
            });
        }
        match *self {
            Quantity::Value => Ok(lb.output().interval(output)),
            Quantity::First(i) | Quantity::Second(i) => {
                let jac = JacobianBounds::new(net, &lb, cfg)?;
                let first = bound_first_with(net, &lb, &jac, i, cfg)?;
                if let Quantity::First(_) = self {
                    return Ok(first.interval(output));
                }
                Ok(bound_second_with(net, &lb, &jac, &first, cfg)?.interval(output))
            }
        }
    }
}

/// Branched enclosure of one output of the quantity over a box.
pub fn bound_quantity(
    net: &DenseNetwork,
    q: Quantity,
    output: usize,
    b: &InputBox,
    bound: &BoundConfig,
    branch: &BranchConfig,
) -> Result<BranchReport, CertifyError> {
    b.check_dim(net.input_dim())?;
    Ok(greedy_branch(
        |bx: &InputBox| q.bound(net, bx, output, bound),
        |x: &[f64]| lift(q.at(net, x, output)),
        b,
        branch,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Activation, DenseLayer};
    use crate::pde::{build_pde, PdeName, TargetFn};
    use ndarray::{arr1, arr2};

    fn net_2_2_1(seed: u64) -> DenseNetwork {
        DenseNetwork::random(&[2, 6, 6, 1], 1.0, seed)
    }

    #[test]
    fn sha_of_known_inputs() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn zero_network_meets_zero_targets() {
        let zero = DenseNetwork::new(
            vec![
                DenseLayer {
                    weight: arr2(&[[0.0, 0.0]]),
                    bias: arr1(&[0.0]),
                },
                DenseLayer {
                    weight: arr2(&[[0.0]]),
                    bias: arr1(&[0.0]),
                },
            ],
            Activation::Tanh,
        )
        .unwrap();
        let ic = InitialCondition {
            time: 0.0,
            coord: 1,
            targets: vec![TargetFn::Zero],
        };
        let b = InputBox::new(vec![0.0, -1.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(
            bound_initial_loss(&zero, &ic, &b).unwrap(),
            Interval::point(0.0)
        );
        let ic = InitialCondition {
            targets: vec![TargetFn::NegSinPi],
            ..ic
        };
        let iv = bound_initial_loss(&zero, &ic, &b).unwrap();
        assert!(iv.hi >= 1.0 && iv.lo <= 0.0);
    }

    #[test]
    fn point_boxes_are_tight() {
        let net = net_2_2_1(3);
        let pde = build_pde(PdeName::Burgers);
        let x = [0.3, -0.4];
        let b = InputBox::point(&x).unwrap();
        let cfg = BoundConfig::default();
        let r = bound_residual_loss(&net, &pde.residuals, &b, &cfg).unwrap();
        let v = residual_loss(&net, &pde.residuals, &x).unwrap();
        assert!(
            r.contains_approx(v, 1e-7) && r.width() <= 1e-6 * (1.0 + v),
            "{r:?} vs {v}"
        );
        let xb = [0.3, 1.0];
        let b = InputBox::point(&xb).unwrap();
        let r = bound_boundary_loss(&net, &pde.boundaries[1], &b, &cfg).unwrap();
        let v = boundary_loss(&net, &pde.boundaries[1], &xb).unwrap();
        assert!(
            r.contains_approx(v, 1e-9) && r.width() <= 1e-9,
            "{r:?} vs {v}"
        );
    }

    #[test]
    fn periodic_pair_is_joint_in_time() {
        // u = tanh(t) does not depend on x, so any periodic mismatch is zero
        let net = DenseNetwork::new(
            vec![
                DenseLayer {
                    weight: arr2(&[[1.0, 0.0]]),
                    bias: arr1(&[0.0]),
                },
                DenseLayer {
                    weight: arr2(&[[1.0]]),
                    bias: arr1(&[0.0]),
                },
            ],
            Activation::Tanh,
        )
        .unwrap();
        let bc = BoundaryCondition::Periodic {
            coord: 1,
            lo: -1.0,
            hi: 1.0,
            derivative: false,
            outputs: vec![0],
        };
        let cfg = BoundConfig::default();
        let b = InputBox::new(vec![0.0, -1.0], vec![1.0, -1.0]).unwrap();
        let iv = bound_boundary_loss(&net, &bc, &b, &cfg).unwrap();
        // separate enclosures of each end would give (tanh 1)² ≈ 0.58
        assert!(iv.lo == 0.0 && iv.hi < 0.01, "{iv:?}");
        let b = InputBox::new(vec![0.5, -1.0], vec![0.5, -1.0]).unwrap();
        let iv = bound_boundary_loss(&net, &bc, &b, &cfg).unwrap();
        assert!(iv.hi <= 1e-24, "{iv:?}");
    }

    #[test]
    fn robin_with_derivative_encloses_samples() {
        let net = net_2_2_1(11);
        let pde = build_pde(PdeName::DiffusionSorption);
        let bc = &pde.boundaries[1];
        let b = InputBox::new(vec![100.0, 1.0], vec![140.0, 1.0]).unwrap();
        let iv = bound_boundary_loss(&net, bc, &b, &BoundConfig::default()).unwrap();
        for k in 0..=40 {
            let x = [100.0 + k as f64, 1.0];
            let v = boundary_loss(&net, bc, &x).unwrap();
            assert!(iv.contains_approx(v, 1e-9), "{iv:?} vs {v}");
        }
    }

    #[test]
    fn verify_rejects_wrong_shape_and_missing_condition() {
        let net = net_2_2_1(1);
        let cfg = CertifyConfig::new(0, 10, 0);
        let sch = build_pde(PdeName::Schrodinger);
        assert!(matches!(
            verify_initial(&net, &sch, &cfg),
            Err(CertifyError::Shape { .. })
        ));
        let ds = build_pde(PdeName::DiffusionSorption);
        assert!(matches!(
            verify_residual(&net, &ds, &cfg),
            Err(CertifyError::NoResidual(..))
        ));
        assert!(matches!(
            verify_boundary(&net, &ds, 5, &cfg),
            Err(CertifyError::NoCondition(..))
        ));
        let runs = verify(&net, &ds, ConditionSelect::All, &cfg).unwrap();
        let tags: Vec<_> = runs.iter().map(|r| r.result.tag.as_str()).collect();
        assert_eq!(tags, ["initial", "boundary[0]", "boundary[1]"]);
    }

    #[test]
    fn certificate_pass_is_conjunction() {
        let net = net_2_2_1(2);
        let pde = build_pde(PdeName::Burgers);
        let mut cfg = CertifyConfig::new(3, 200, 4);
        let runs = verify(&net, &pde, ConditionSelect::All, &cfg).unwrap();
        for r in &runs {
            assert!(r.result.certified >= r.result.empirical);
            assert_eq!(r.result.pass, r.result.certified <= r.result.tolerance);
        }
        let cert = Certificate::new(
            "00".into(),
            "burgers",
            runs.into_iter().map(|r| r.result).collect(),
        );
        assert_eq!(cert.pass, cert.conditions.iter().all(|c| c.pass));
        let back: Certificate = serde_json::from_str(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
        cfg.tolerances.residual = f64::INFINITY;
        cfg.tolerances.initial = f64::INFINITY;
        cfg.tolerances.boundary = f64::INFINITY;
        let runs = verify(&net, &pde, ConditionSelect::All, &cfg).unwrap();
        assert!(runs.iter().all(|r| r.result.pass));
    }

    #[test]
    fn empty_certificate_passes_and_one_failure_fails() {
        let ok = Certificate::new("ab".into(), "burgers", vec![]);
        assert!(ok.pass);
        let path =
            std::env::temp_dir().join(format!("pinn-cert-empty-{}.json", std::process::id()));
        ok.write(&path).unwrap();
        let back: Certificate =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, ok);
        std::fs::remove_file(&path).unwrap();
        let cond = |pass| ConditionResult {
            tag: "initial".into(),
            certified: 1.0,
            empirical: 0.5,
            tolerance: 2.0,
            pass,
            nb: 0,
            ns: 1,
            seed: 0,
            seconds: 0.0,
        };
        assert!(!Certificate::new("ab".into(), "burgers", vec![cond(true), cond(false)]).pass);
    }

    #[test]
    fn zero_network_certifies_burgers_exactly() {
        let layer = |rows: usize, cols: usize| DenseLayer {
            weight: ndarray::Array2::zeros((rows, cols)),
            bias: ndarray::Array1::zeros(rows),
        };
        let zero = DenseNetwork::new(
            vec![layer(4, 2), layer(4, 4), layer(1, 4)],
            Activation::Tanh,
        )
        .unwrap();
        let pde = build_pde(PdeName::Burgers);
        let cfg = CertifyConfig::new(5, 100, 0);
        let res = verify_residual(&zero, &pde, &cfg).unwrap();
        assert_eq!(res.result.certified, 0.0);
        for run in verify_boundaries(&zero, &pde, &cfg).unwrap() {
            assert_eq!(run.result.certified, 0.0);
        }
    }

    #[test]
    fn quantity_bounds_enclose_point_values() {
        let net = net_2_2_1(5);
        let b = InputBox::new(vec![0.1, -0.2], vec![0.4, 0.3]).unwrap();
        let cfg = BoundConfig::default();
        for q in [Quantity::Value, Quantity::First(0), Quantity::Second(1)] {
            let iv = q.bound(&net, &b, 0, &cfg).unwrap();
            for &x in &[[0.1, -0.2], [0.4, 0.3], [0.25, 0.05]] {
                assert!(iv.contains_approx(q.at(&net, &x, 0).unwrap(), 1e-9));
            }
        }
        assert!(Quantity::Value.bound(&net, &b, 1, &cfg).is_err());
    }
}
