use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use qdo_core::grouping::{
    circuit_count_bound, exact_grouping, greedy_grouping, groups_to_json, singleton_grouping, Grouping, GroupingMethod,
};
use qdo_core::model::{
    build_1d_hamiltonian, coupling_parallel, example_extended_hamiltonian, parse_separation_grid, CouplingGraph,
    HamiltonianSpec, Separation,
};
use qdo_core::oracle::{analytic_binding_energy, exact_diag, london_1d, truncation_study};
use qdo_core::pipeline::{dispersion_sweep, pair_at, DispersionConfig, DispersionRow, NoisySweep};
use qdo_core::shots::{
    bound_grouped_spherical, bound_uncoupled, bound_ungrouped_spherical, estimate_shots, StateModel,
};
use qdo_core::sim::NoiseModel;
use qdo_core::vqe::{default_circuit, run_vqe, AdamConfig, Evaluator, VqeConfig, VqeRun};
use qdo_core::Error;

use crate::{ModelArgs, ShotModel};

/// 2 for unreadable input (malformed JSON, bad numbers), 1 otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Json(_) | Error::Parse(_) => 2,
                _ => 1,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_csv<T: Serialize>(rows: &[T], out: Option<&Path>) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_text(text: &str, out: Option<&Path>) -> Result<()> {
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn dense_graph(n: usize, gamma: f64) -> qdo_core::Result<CouplingGraph> {
    if gamma == 0.0 {
        CouplingGraph::uncoupled(n)
    } else {
        CouplingGraph::complete(n, gamma)
    }
}

pub fn load_model(m: &ModelArgs) -> Result<HamiltonianSpec> {
    if let Some(path) = &m.spec {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec = HamiltonianSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
        if m.extended {
            bail!("--extended applies to inline models; add terms to the \"extra\" list of the --spec file instead");
        }
        return Ok(spec);
    }
    let gamma = match (&m.alpha, &m.r) {
        (Some(alpha), Some(r)) => {
            if m.n != 2 {
                bail!("--alpha/--r describe a pair; --n must be 2");
            }
            let r: Separation = r.parse()?;
            if !m.extended {
                return Ok(pair_at(*alpha, r, m.d)?);
            }
            coupling_parallel(*alpha, r)?
        }
        _ => m.gamma.unwrap_or(0.0),
    };
    if m.extended {
        if m.n != 2 {
            bail!("the extended demo model is a pair; --n must be 2");
        }
        return Ok(example_extended_hamiltonian(gamma, m.d)?);
    }
    Ok(HamiltonianSpec::new(m.d, dense_graph(m.n, gamma)?, Vec::new())?)
}

fn grouping_of(spec: &HamiltonianSpec) -> Result<(qdo_core::PauliSum, Grouping)> {
    let h = build_1d_hamiltonian(spec)?;
    let g = exact_grouping(&h, &spec.register_map(), spec.graph())?;
    Ok((h, g))
}

pub fn decompose(m: &ModelArgs, out: Option<&Path>) -> Result<()> {
    let spec = load_model(m)?;
    let h = build_1d_hamiltonian(&spec)?;
    write_text(&h.to_json()?, out)?;
    let summary = format!(
        "terms={} non_identity={} qubits={} identity_coefficient={}",
        h.len(),
        h.non_identity_len(),
        h.num_qubits(),
        h.identity_coefficient().re
    );
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

#[derive(Serialize)]
struct GroupRow {
    n: usize,
    d: usize,
    terms: usize,
    exact: usize,
    greedy: usize,
    bound: Option<u64>,
    method: &'static str,
}

fn method_name(m: GroupingMethod) -> &'static str {
    match m {
        GroupingMethod::Exact => "exact",
        GroupingMethod::GreedyFallback => "greedy_fallback",
        GroupingMethod::Greedy => "greedy",
        GroupingMethod::Singleton => "singleton",
    }
}

fn group_row(spec: &HamiltonianSpec) -> Result<(GroupRow, Grouping)> {
    let (h, exact) = grouping_of(spec)?;
    let greedy = greedy_grouping(&h)?;
    let bound = if spec.n() >= 2 { Some(circuit_count_bound(spec.n(), spec.d(), 2)?) } else { None };
    let row = GroupRow {
        n: spec.n(),
        d: spec.d(),
        terms: h.len(),
        exact: exact.len(),
        greedy: greedy.len(),
        bound,
        method: method_name(exact.method),
    };
    Ok((row, exact))
}

pub fn group(
    m: &ModelArgs,
    n_list: &[usize],
    d_list: &[usize],
    groups_out: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    if n_list.is_empty() && d_list.is_empty() {
        let (row, exact) = group_row(&load_model(m)?)?;
        if let Some(p) = groups_out {
            write_text(&groups_to_json(&exact.groups)?, Some(p))?;
        }
        return write_csv(&[row], out);
    }
    if m.spec.is_some() || groups_out.is_some() {
        bail!("--n-list/--d-list build their own models; --spec and --groups-out need a single model");
    }
    let ns = if n_list.is_empty() { vec![m.n] } else { n_list.to_vec() };
    let ds = if d_list.is_empty() { vec![m.d] } else { d_list.to_vec() };
    let gamma = m.gamma.unwrap_or(1.0);
    let mut rows = Vec::new();
    for &n in &ns {
        for &d in &ds {
            let spec = HamiltonianSpec::new(d, dense_graph(n, gamma)?, Vec::new())?;
            rows.push(group_row(&spec)?.0);
        }
    }
    write_csv(&rows, out)
}

pub struct ShotsArgs {
    pub n_list: Vec<usize>,
    pub d_list: Vec<usize>,
    pub gamma: f64,
    pub eps: f64,
    /// `(fraction, R_vdW, alpha)`.
    pub eps_rel: Option<(f64, f64, f64)>,
    pub model: ShotModel,
    pub direct_max_qubits: usize,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ShotRow {
    n: usize,
    d: usize,
    model: &'static str,
    grouped: bool,
    epsilon: f64,
    shots: Option<f64>,
    bound: f64,
}

pub fn shots(a: ShotsArgs) -> Result<()> {
    let eps = match a.eps_rel {
        Some((frac, r, alpha)) => {
            let gamma = coupling_parallel(alpha, Separation::new(r)?)?;
            frac * analytic_binding_energy(gamma)?.abs()
        }
        None => a.eps,
    };
    let mut rows = Vec::new();
    for &n in &a.n_list {
        for &d in &a.d_list {
            let graph = CouplingGraph::complete(n, a.gamma)?;
            let spec = HamiltonianSpec::new(d, graph.clone(), Vec::new())?;
            let direct = spec.num_qubits() <= a.direct_max_qubits;
            let built = if direct { Some(grouping_of(&spec)?) } else { None };
            let singles = match &built {
                Some((h, _)) => Some(singleton_grouping(h)?),
                None => None,
            };
            let mut models = Vec::new();
            if a.model != ShotModel::Uncoupled {
                models.push(("spherical", StateModel::SphericalMeasure));
            }
            if a.model != ShotModel::Spherical {
                models.push(("uncoupled", StateModel::UncoupledPure));
            }
            for (name, state) in models {
                for grouped in [true, false] {
                    let bound = match (name, grouped) {
                        ("spherical", true) => bound_grouped_spherical(&graph, d, eps)?,
                        ("spherical", false) => bound_ungrouped_spherical(&graph, d, eps)?,
                        _ => bound_uncoupled(&graph, d, eps, grouped)?,
                    };
                    let shots = match (&built, &singles) {
                        (Some((h, g)), Some(s)) => {
                            let groups = if grouped { &g.groups } else { &s.groups };
                            Some(estimate_shots(h, groups, &state, eps)?.total)
                        }
                        _ => None,
                    };
                    rows.push(ShotRow { n, d, model: name, grouped, epsilon: eps, shots, bound });
                }
            }
        }
    }
    write_csv(&rows, a.out.as_deref())
}

#[derive(Serialize)]
struct VqeRecord<'a> {
    spec: &'a HamiltonianSpec,
    config: &'a VqeConfig,
    grouping_method: &'static str,
    exact_ground_energy: Option<f64>,
    run: &'a VqeRun,
}

#[derive(Serialize)]
struct TraceRow {
    step: usize,
    energy: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn vqe(
    m: &ModelArgs,
    seed: u64,
    steps: usize,
    shots: u64,
    lambda: f64,
    lr: f64,
    json_out: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let spec = load_model(m)?;
    let (h, grouping) = grouping_of(&spec)?;
    let noise = NoiseModel::new(lambda)?;
    let evaluator = if shots == 0 {
        if lambda > 0.0 {
            bail!("--lambda needs sampled evaluation; pass --shots");
        }
        Evaluator::Exact
    } else {
        Evaluator::Sampled { shots: vec![shots; grouping.len()], noise }
    };
    let config = VqeConfig { adam: AdamConfig { lr, ..AdamConfig::default() }, steps, seed, evaluator, ..VqeConfig::default() };
    let circuit = default_circuit(h.num_qubits())?;
    let run = run_vqe(&h, &grouping.groups, &circuit, &config)?;
    let exact = match exact_diag(&spec) {
        Ok(g) => Some(g.energy),
        Err(Error::TooLarge { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    log::info!("final energy {} (noise-free {}), exact {:?}", run.final_energy, run.exact_final_energy, exact);
    if let Some(p) = json_out {
        let record = VqeRecord {
            spec: &spec,
            config: &config,
            grouping_method: method_name(grouping.method),
            exact_ground_energy: exact,
            run: &run,
        };
        write_text(&serde_json::to_string_pretty(&record)?, Some(p))?;
    }
    let trace: Vec<TraceRow> = run.trace.iter().enumerate().map(|(step, &energy)| TraceRow { step, energy }).collect();
    write_csv(&trace, out)
}

pub struct DispersionArgs {
    pub seed: u64,
    pub alpha: f64,
    pub hbar_omega: f64,
    pub d: usize,
    pub grid: String,
    pub steps: usize,
    pub lambda: Option<f64>,
    pub shots: u64,
    pub reps: usize,
    pub json_out: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct DispersionCsv {
    r: Separation,
    gamma: f64,
    e_exact: f64,
    e_vqe: f64,
    de_exact_ev: f64,
    de_vqe_ev: f64,
    de_noisy_ev: Option<f64>,
    de_noisy_stderr_ev: Option<f64>,
    lambda_mean: Option<f64>,
    london_ev: f64,
}

impl From<&DispersionRow> for DispersionCsv {
    fn from(r: &DispersionRow) -> Self {
        Self {
            r: r.r,
            gamma: r.gamma,
            e_exact: r.e_exact,
            e_vqe: r.e_vqe,
            de_exact_ev: r.de_exact,
            de_vqe_ev: r.de_vqe,
            de_noisy_ev: r.de_noisy,
            de_noisy_stderr_ev: r.de_noisy_stderr,
            lambda_mean: r.lambda_mean,
            london_ev: r.london,
        }
    }
}

pub fn dispersion(a: DispersionArgs) -> Result<()> {
    let cfg = DispersionConfig {
        alpha: a.alpha,
        hbar_omega: a.hbar_omega,
        d: a.d,
        grid: parse_separation_grid(&a.grid)?,
        vqe: VqeConfig { steps: a.steps, ..VqeConfig::default() },
        noisy: a.lambda.map(|lambda| NoisySweep { lambda, shots_per_group: a.shots, repetitions: a.reps }),
        seed: a.seed,
    };
    let rows = dispersion_sweep(&cfg)?;
    if let Some(p) = &a.json_out {
        write_text(&serde_json::to_string_pretty(&rows)?, Some(p))?;
    }
    let csv: Vec<DispersionCsv> = rows.iter().map(DispersionCsv::from).collect();
    write_csv(&csv, a.out.as_deref())
}

pub fn truncation(gammas: &[f64], ds: &[usize], out: Option<&Path>) -> Result<()> {
    write_csv(&truncation_study(gammas, ds)?, out)
}

#[derive(Serialize)]
struct SpectrumRow {
    r: Separation,
    gamma: f64,
    /// Normal-mode binding energy; empty beyond dissociation.
    de_normal_mode_ev: Option<f64>,
    london_ev: f64,
}

pub fn spectrum(alpha: f64, hbar_omega: f64, grid: &str, out: Option<&Path>) -> Result<()> {
    let mut rows = Vec::new();
    for r in parse_separation_grid(grid)? {
        let gamma = coupling_parallel(alpha, r)?;
        rows.push(SpectrumRow {
            r,
            gamma,
            de_normal_mode_ev: analytic_binding_energy(gamma).ok().map(|e| e * hbar_omega / 2.0),
            london_ev: london_1d(alpha, hbar_omega, r)?,
        });
    }
    write_csv(&rows, out)
}
