//! One runner per subcommand. Each evaluates its grid on the worker pool and
//! returns a table of rows keyed for deterministic ordering.

use anyhow::Result;
use rayon::prelude::*;

use metroq::ce_bounds::{asymptotic_ce_bound, finite_ce_bound, CeConfig};
use metroq::collective::{self, BruteForceConfig};
use metroq::covariance::{self, phase_cov_feasible, seesaw_channel_qfi, PhaseCovariance, SeesawConfig};
use metroq::fisher::{gamma_coefficient, moment_lower_bound, GammaConfig};
use metroq::global_control::{ghz_lower_bound, werner_exact, werner_lower_bound, BitFlip};
use metroq::linalg::{self, CMat};
use metroq::photonics::{optimal_gamma_photonic, single_photon_channel};
use metroq::qcore::{
    conjugate_map_compact, conjugate_map_qc, povm_from_detection, DetectionChannel, Povm, ProjectiveMeasurement,
    UnitaryEncoding,
};
use metroq::readout::{self, PoissonReadout};

use crate::output::{Cell, Table};
use crate::params::*;

/// Computed row: sort key, cells, and a description if a solver stalled.
struct Row {
    key: Vec<f64>,
    cells: Vec<Cell>,
    unconverged: Option<String>,
}

impl Row {
    fn new(key: Vec<f64>, cells: Vec<Cell>) -> Self {
        Self { key, cells, unconverged: None }
    }

    fn flag_unless(mut self, converged: bool, what: impl FnOnce() -> String) -> Self {
        if !converged {
            self.unconverged = Some(what());
        }
        self
    }
}

/// Evaluates `f` on every point in parallel and collects the rows.
fn run_grid<T, F>(header: Vec<&'static str>, points: Vec<T>, f: F) -> Result<Table>
where
    T: Send + Sync,
    F: Fn(&T) -> Result<Row> + Send + Sync,
{
    let rows: Vec<Row> = points.par_iter().map(&f).collect::<Result<_>>()?;
    let mut table = Table::new(header);
    for row in rows {
        if let Some(msg) = row.unconverged {
            table.unconverged.push(msg);
        }
        table.push(row.key, row.cells);
    }
    Ok(table)
}

fn pairs<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn poisson(lambda0: f64, ratio: f64, cutoff: usize, tail_tol: f64) -> Result<PoissonReadout> {
    Ok(PoissonReadout::with_tail_tol(lambda0, ratio * lambda0, cutoff, tail_tol)?)
}

fn sigma_z_half() -> CMat {
    linalg::sigma_z().scale(0.5)
}

pub fn gamma(params: &GammaParams, seed: u64) -> Result<Table> {
    let cfg = GammaConfig { restarts: params.restarts(), seed, ..GammaConfig::default() };
    let header = vec!["p", "q", "gamma", "gamma_closed", "sin_phi"];
    run_grid(header, pairs(&params.p(), &params.q()), |&(p, q)| {
        let (report, _) = gamma_coefficient(&covariance::bit_flip_povm(p, q)?, &cfg)?;
        let (closed, sin_phi) = readout::f2bin_bar(p, q)?;
        let cells = vec![p.into(), q.into(), report.value.into(), closed.into(), sin_phi.into()];
        Ok(Row::new(vec![p, q], cells).flag_unless(report.converged, || format!("gamma search at p={p}, q={q}")))
    })
}

pub fn nv_fi(params: &NvFiParams) -> Result<Table> {
    let header = vec!["lambda0", "lambda1", "F_exact", "F_2bin", "F_3bin", "ratio_2bin", "ratio_3bin", "x_star"];
    run_grid(header, params.lambda0(), |&lambda0| {
        let r = poisson(lambda0, params.ratio(), params.cutoff(), params.tail_tol())?;
        let exact = readout::nv_exact_fi_bar(&r).0;
        let (scheme, two) = readout::optimize_binning(&r, 2)?;
        let three = readout::optimize_binning(&r, 3)?.1;
        let cells = vec![
            lambda0.into(),
            r.lambda1().into(),
            exact.into(),
            two.into(),
            three.into(),
            (two / exact).into(),
            (three / exact).into(),
            scheme.boundaries()[0].into(),
        ];
        Ok(Row::new(vec![lambda0], cells))
    })
}

pub fn binning(params: &BinningParams) -> Result<Table> {
    let header = vec!["lambda0", "lambda1", "bins", "F_exact", "F_binned", "ratio", "boundaries"];
    run_grid(header, pairs(&params.lambda0(), &params.bins()), |&(lambda0, k)| {
        let r = poisson(lambda0, params.ratio(), params.cutoff(), params.tail_tol())?;
        let exact = readout::nv_exact_fi_bar(&r).0;
        let (scheme, binned) = readout::optimize_binning(&r, k)?;
        let bounds: Vec<String> = scheme.boundaries().iter().map(|b| b.to_string()).collect();
        let cells = vec![
            lambda0.into(),
            r.lambda1().into(),
            k.into(),
            exact.into(),
            binned.into(),
            (binned / exact).into(),
            Cell::Text(bounds.join(";")),
        ];
        Ok(Row::new(vec![lambda0, k as f64], cells))
    })
}

pub fn moments(params: &MomentsParams) -> Result<Table> {
    let header = vec!["lambda0", "lambda1", "phi", "K", "F_exact", "moment_bound", "ratio"];
    run_grid(header, pairs(&params.lambda0(), &params.orders()), |&(lambda0, k)| {
        let r = poisson(lambda0, params.ratio(), params.cutoff(), params.tail_tol())?;
        let phi = if params.phi().is_nan() { readout::nv_exact_fi_bar(&r).1 } else { params.phi() };
        let (c0, c1) = r.columns();
        let exact = readout::nv_exact_fi(&r, phi);
        let (probs, dprobs) = readout::binary_input_distribution(&c0, &c1, phi);
        let w: Vec<f64> = (0..probs.len()).map(|x| x as f64).collect();
        let bound = moment_lower_bound(&probs, &dprobs, k, &w)?;
        let cells = vec![
            lambda0.into(),
            r.lambda1().into(),
            phi.into(),
            k.into(),
            exact.into(),
            bound.value.into(),
            (bound.value / exact).into(),
        ];
        Ok(Row::new(vec![lambda0, k as f64], cells))
    })
}

pub fn ghz_sweep(params: &GhzSweepParams) -> Result<Table> {
    let noise = BitFlip::new(params.p(), params.q())?;
    let r = params.r();
    let header = vec!["N", "f_lower", "f_exact", "f_perfect", "r", "werner_lower", "werner_exact"];
    run_grid(header, (1..=params.n_max()).collect(), |&n| {
        let report = ghz_lower_bound(n, noise)?;
        let cells = vec![
            n.into(),
            report.f_lower.into(),
            report.f_exact.into(),
            ((n * n) as f64).into(),
            r.into(),
            werner_lower_bound(n, noise, r)?.into(),
            werner_exact(n, noise, r)?.into(),
        ];
        Ok(Row::new(vec![n as f64], cells))
    })
}

/// Largest finite CE bound over local controls `e^{iασ_y}` with `α` spread
/// over `[0, π/2]`; rotations about z leave the bound unchanged.
fn finite_ce_over_controls(m: &Povm, n: usize, angles: usize, cfg: &CeConfig) -> Result<(f64, bool)> {
    let enc = UnitaryEncoding::qubit_phase();
    let steps = angles.max(1);
    let mut best = (0.0f64, true);
    for k in 0..steps {
        let alpha = if steps == 1 { 0.0 } else { k as f64 * std::f64::consts::FRAC_PI_2 / (steps - 1) as f64 };
        let v = linalg::expm_i_herm(&linalg::sigma_y(), alpha);
        let r = finite_ce_bound(m, &enc, &v, n, cfg)?;
        best.1 &= r.converged;
        best.0 = best.0.max(r.bound);
    }
    Ok(best)
}

pub fn local_sweep(params: &LocalSweepParams, seed: u64) -> Result<Table> {
    let (p, q) = (params.p(), params.q());
    let m = covariance::bit_flip_povm(p, q)?;
    let ch = DetectionChannel::bit_flip(p, q)?;
    let ce_cfg = CeConfig { seed, ..CeConfig::default() };
    let asym = asymptotic_ce_bound(&m, &UnitaryEncoding::qubit_phase(), &linalg::identity(2), &ce_cfg)?;
    let phi = collective::optimal_phi(p, q)?;
    let gamma1 = readout::f2bin_bar(p, q)?.0;
    let bf_cfg = BruteForceConfig { restarts: params.restarts(), seed, ..BruteForceConfig::default() };
    let header = vec![
        "N",
        "mse_squeezed",
        "mse_parity",
        "inv_ce_finite",
        "inv_ce_asymptotic",
        "brute_force",
        "uncorrelated_baseline",
    ];
    run_grid(header, params.n(), |&n| {
        let nf = n as f64;
        let state = collective::one_axis_squeezed(n, nf.powf(-8.0 / 9.0))?;
        let squeezed = collective::jx_mse(&state, 0.0, p, q, phi)?;
        let parity = collective::optimal_parity_mse(n, p, q)?.1;
        let (finite, finite_ok) = finite_ce_over_controls(&m, n, params.control_angles(), &ce_cfg)?;
        let (brute, brute_ok) = if n <= params.brute_force_max_n() {
            let report = collective::brute_force_imperfect_qfi(n, &ch, &bf_cfg)?;
            (Some(1.0 / report.value), report.converged)
        } else {
            (None, true)
        };
        let cells = vec![
            n.into(),
            squeezed.into(),
            parity.into(),
            (1.0 / finite).into(),
            (1.0 / asym.bound_asymptotic(n)).into(),
            brute.into(),
            (1.0 / (nf * gamma1)).into(),
        ];
        let converged = finite_ok && brute_ok && asym.converged;
        Ok(Row::new(vec![nf], cells).flag_unless(converged, || format!("local-sweep solvers at N={n}")))
    })
}

pub fn ce_sweep(params: &CeSweepParams, seed: u64) -> Result<Table> {
    let id = linalg::identity(2);
    let m = match params.model().as_str() {
        "bit-flip" => covariance::bit_flip_povm(params.p(), params.q())?,
        "photonic" => povm_from_detection(
            &single_photon_channel(params.eta(), params.p_dark())?,
            &ProjectiveMeasurement::plus_minus(),
            &id,
        )?,
        other => return Err(ConfigError(format!("unknown model {other:?}; expected \"bit-flip\" or \"photonic\"")).into()),
    };
    let enc = UnitaryEncoding::qubit_phase();
    let cfg = CeConfig { seed, max_iters: params.max_iters(), ..CeConfig::default() };
    let asym = asymptotic_ce_bound(&m, &enc, &id, &cfg)?;
    let header = vec!["N", "bound_finite", "bound_asymptotic", "per_probe_c", "solver_iters", "converged"];
    run_grid(header, params.n(), |&n| {
        let finite = finite_ce_bound(&m, &enc, &id, n, &cfg)?;
        let converged = finite.converged && asym.converged;
        let cells = vec![
            n.into(),
            finite.bound.into(),
            asym.bound_asymptotic(n).into(),
            asym.per_probe.into(),
            (finite.iters + asym.iters).into(),
            converged.into(),
        ];
        Ok(Row::new(vec![n as f64], cells).flag_unless(converged, || format!("CE solver at N={n}")))
    })
}

pub fn covariance_audit(params: &CovarianceAuditParams, seed: u64) -> Result<Table> {
    let cfg = SeesawConfig { restarts: params.restarts(), max_iters: params.max_iters(), seed, ..SeesawConfig::default() };
    let h = sigma_z_half();
    let header = vec![
        "p",
        "q",
        "feasible",
        "phase_cov_qfi_min",
        "imperfect_qfi",
        "qc_channel_qfi",
        "compact_channel_qfi",
    ];
    run_grid(header, pairs(&params.p(), &params.q()), |&(p, q)| {
        let qfi_min = match phase_cov_feasible(p, q)? {
            None => None,
            Some(PhaseCovariance::Dephasing { qfi }) => Some(qfi),
            Some(PhaseCovariance::Intervals { qfi_min, .. }) => Some(qfi_min),
        };
        let m = covariance::bit_flip_povm(p, q)?;
        let qc = seesaw_channel_qfi(&h, &conjugate_map_qc(&m)?, &cfg)?;
        let compact = seesaw_channel_qfi(&h, &conjugate_map_compact(&m)?, &cfg)?;
        let cells = vec![
            p.into(),
            q.into(),
            qfi_min.is_some().into(),
            qfi_min.into(),
            readout::f2bin_bar(p, q)?.0.into(),
            qc.value.into(),
            compact.value.into(),
        ];
        let converged = qc.converged && compact.converged;
        Ok(Row::new(vec![p, q], cells).flag_unless(converged, || format!("seesaw at p={p}, q={q}")))
    })
}

pub fn photon_sweep(params: &PhotonSweepParams) -> Result<Table> {
    let mut points = Vec::new();
    for &n in &params.n() {
        for &eta in &params.eta() {
            for &p_dark in &params.p_dark() {
                points.push((n, eta, p_dark));
            }
        }
    }
    let header = vec!["N", "eta", "p_dark", "gamma", "noon_fi", "phi_opt"];
    run_grid(header, points, |&(n, eta, p_dark)| {
        let (phi, gamma) = optimal_gamma_photonic(eta, p_dark, n)?;
        let cells = vec![n.into(), eta.into(), p_dark.into(), gamma.into(), ((n * n) as f64 * gamma).into(), phi.into()];
        Ok(Row::new(vec![n as f64, eta, p_dark], cells))
    })
}
