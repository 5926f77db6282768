//! The `shiftlab` command line. [`run`] returns the exit status and the
//! text for stdout (machine-readable) and stderr (human summary), so the
//! binary stays a thin wrapper.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::codes::{
    check_witness, recode_potential, transport_measure, verify_correspondence, verify_magic_with_budget,
    CorrespondenceOptions, EventuallyPeriodicPoint, MagicStatus, MagicWitness, OneBlockCode, TransportOptions,
};
use crate::error::{Result, ShiftError};
use crate::induction::{induce, induce_from_base, lift_loops, verify_zn_coincidence, InducedPresentation, LoopTail};
use crate::io::{
    emit_loops, emit_measure, load_ai, load_code, load_measure, load_potential, load_shift, to_canonical_string,
    PotentialDocument,
};
use crate::potential::FiniteRangePotential;
use crate::shift::{FiniteGraph, ShiftPresentation};
use crate::thermo::{
    equilibrium_measure, measure_pressure, partition_function, pressure_exhaustion, pressure_from_table, pressure_spectral,
    recurrence_classify, zeta_series, PressureEstimate, ZetaSeries,
};

#[derive(Debug, Parser)]
#[command(name = "shiftlab", version, about = "Thermodynamic formalism for Markov shifts on finite data")]
struct Cli {
    /// Worker threads for the parallel parts (results do not depend on it).
    #[arg(long, global = true, env = "SHIFTLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Topological entropy of a shift.
    Entropy {
        #[arg(long)]
        shift: PathBuf,
    },
    /// Gurevich pressure of a potential.
    Pressure(PressureArgs),
    /// Local partition functions as CSV.
    Zn(ZnArgs),
    /// Recurrence class of a loop system or of a graph induced on a word.
    Classify(ClassifyArgs),
    /// Artin-Mazur zeta series coefficients.
    Zeta {
        #[arg(long)]
        shift: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        potential: Option<PathBuf>,
    },
    /// Equilibrium measure of a potential.
    Equilibrium {
        #[arg(long)]
        shift: PathBuf,
        #[arg(long)]
        potential: PathBuf,
        /// Write the measure document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Induced presentation on one or two words, written as a loop system.
    Induce(InduceArgs),
    /// Certify or refute a magic word of a one-block code.
    VerifyMagic(MagicArgs),
    /// Move a measure across an almost isomorphism.
    Transport(TransportArgs),
    /// Check that two potentials correspond under an almost isomorphism.
    VerifyCorrespondence(CorrespondenceArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PressureMethodArg {
    Spectral,
    Table,
}

#[derive(Debug, Args)]
struct PressureArgs {
    #[arg(long)]
    shift: PathBuf,
    #[arg(long)]
    potential: PathBuf,
    #[arg(long, value_enum, default_value = "spectral")]
    method: PressureMethodArg,
    /// Table length for the table method.
    #[arg(long, default_value_t = 16)]
    n_max: usize,
    /// Word the table is localized at (default: empty).
    #[arg(long, default_value = "")]
    word: String,
}

#[derive(Debug, Args)]
struct ZnArgs {
    #[arg(long)]
    shift: PathBuf,
    #[arg(long)]
    potential: PathBuf,
    #[arg(long)]
    n_max: usize,
    #[arg(long, default_value = "")]
    word: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// A loop-system document.
    #[arg(long, conflicts_with = "shift")]
    loops: Option<PathBuf>,
    /// A graph to induce on `--word`.
    #[arg(long, requires = "word")]
    shift: Option<PathBuf>,
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    word2: Option<String>,
    #[arg(long)]
    potential: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    maxlen: usize,
    /// Pad the words as `w a w b` before inducing.
    #[arg(long)]
    from_base: bool,
}

#[derive(Debug, Args)]
struct InduceArgs {
    #[arg(long)]
    shift: PathBuf,
    #[arg(long)]
    word: String,
    #[arg(long)]
    word2: Option<String>,
    #[arg(long, default_value_t = 16)]
    maxlen: usize,
    #[arg(long)]
    from_base: bool,
    /// Lift this potential onto the loops.
    #[arg(long)]
    potential: Option<PathBuf>,
    /// Compare Z_n of the shift and of the loops for n up to this value.
    #[arg(long)]
    check_zn: Option<usize>,
    /// Write the loop-system document here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MagicArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    word: String,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    offset: i64,
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = crate::codes::magic::DEFAULT_MAGIC_BUDGET)]
    budget: u64,
}

#[derive(Debug, Args)]
struct TransportArgs {
    #[arg(long)]
    ai: PathBuf,
    /// Measure document on the source shift.
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Sample even when a closed form exists.
    #[arg(long)]
    sample: bool,
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CorrespondenceArgs {
    #[arg(long)]
    ai: PathBuf,
    /// Potential on the source shift.
    #[arg(long)]
    f: PathBuf,
    /// Potential on the target shift; omitted with `--recode`.
    #[arg(long, required_unless_present = "recode")]
    g: Option<PathBuf>,
    /// Use the block recoding of `f` as `g`.
    #[arg(long)]
    recode: bool,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, default_value_t = 2)]
    block_len: usize,
    #[arg(long)]
    sample: bool,
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    #[arg(long)]
    seed: Option<u64>,
}

/// What the binary prints and returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn report(code: i32, report: &Value, human: String) -> Self {
        Outcome { code, stdout: to_canonical_string(report), stderr: human }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    if let Some(n) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match dispatch(cli.command) {
        Ok(o) => o,
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

/// `{"value": v, "error": e}`.
fn est(value: f64, error: f64) -> Value {
    json!({"value": num(value), "error": num(error)})
}

/// `{"value": v, "exact": true}`.
fn exact(value: f64) -> Value {
    json!({"value": num(value), "exact": true})
}

/// Finite floats as numbers, the rest as strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn estimate_json(p: &PressureEstimate) -> Value {
    json!({
        "value": num(p.value),
        "error": num(p.error),
        "method": p.method,
        "iterations": p.iterations,
        "levels": p.levels.iter().map(|&x| num(x)).collect::<Vec<_>>(),
    })
}

fn graph_of(shift: &Path) -> Result<FiniteGraph> {
    match load_shift(shift)? {
        ShiftPresentation::Finite(g) => Ok(g),
        ShiftPresentation::Exhaustion(e) => Ok(e.top().clone()),
        ShiftPresentation::Loops(_) => Err(ShiftError::InvalidArgument("this command needs a graph, not a loop system".into())),
    }
}

fn potential_or_zero(path: Option<&Path>, g: &FiniteGraph) -> Result<FiniteRangePotential> {
    match path {
        Some(p) => Ok(load_potential(p, g)?.potential),
        None => Ok(FiniteRangePotential::zero(g)),
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Entropy { shift } => entropy(&shift),
        Command::Pressure(a) => pressure(&a),
        Command::Zn(a) => zn(&a),
        Command::Classify(a) => classify(&a),
        Command::Zeta { shift, order, potential } => zeta(&shift, order, potential.as_deref()),
        Command::Equilibrium { shift, potential, out } => equilibrium(&shift, &potential, out.as_deref()),
        Command::Induce(a) => induce_cmd(&a),
        Command::VerifyMagic(a) => verify_magic_cmd(&a),
        Command::Transport(a) => transport(&a),
        Command::VerifyCorrespondence(a) => correspondence(&a),
    }
}

fn entropy(shift: &Path) -> Result<Outcome> {
    let (est_json, period, value) = match load_shift(shift)? {
        ShiftPresentation::Finite(g) => {
            let p = pressure_spectral(&g, &FiniteRangePotential::zero(&g))?;
            (estimate_json(&p), g.irreducible_and_period().1, p.value)
        }
        ShiftPresentation::Exhaustion(e) => {
            let p = pressure_exhaustion(&e, &FiniteRangePotential::zero(e.top()))?;
            (estimate_json(&p), e.top().irreducible_and_period().1, p.value)
        }
        ShiftPresentation::Loops(ls) => {
            let c = recurrence_classify(&ls)?;
            let lam = c.lambda.ok_or_else(|| ShiftError::VerificationFailed(format!("no root of F = 1 ({})", c.note)))?;
            let (lo, hi) = (lam.lower.ln(), lam.upper.ln());
            let v = json!({"value": num(0.5 * (lo + hi)), "error": num(0.5 * (hi - lo)), "method": "loop_root"});
            (v, Some(ls.period()), 0.5 * (lo + hi))
        }
    };
    let report = json!({"command": "entropy", "entropy": est_json, "period": period});
    Ok(Outcome::report(0, &report, format!("entropy  {value:.12}\nperiod   {}\n", period.map_or("-".into(), |p| p.to_string()))))
}

fn pressure(a: &PressureArgs) -> Result<Outcome> {
    let shift = load_shift(&a.shift)?;
    let p = match (&shift, a.method) {
        (ShiftPresentation::Finite(g), PressureMethodArg::Spectral) => pressure_spectral(g, &load_potential(&a.potential, g)?.potential)?,
        (ShiftPresentation::Finite(g), PressureMethodArg::Table) => {
            let f = load_potential(&a.potential, g)?.potential;
            let w = g.parse_word(&a.word)?;
            let t = partition_function(g, &f, &w, a.n_max)?;
            pressure_from_table(&t, shift.period().max(1))?
        }
        (ShiftPresentation::Exhaustion(e), _) => pressure_exhaustion(e, &load_potential(&a.potential, e.top())?.potential)?,
        (ShiftPresentation::Loops(_), _) => {
            return Err(ShiftError::InvalidArgument("loop systems carry their weights; use `classify`".into()));
        }
    };
    let report = json!({"command": "pressure", "pressure": estimate_json(&p)});
    let human = format!("pressure  {:.12} ± {:.3e}  ({:?})\n", p.value, p.error, p.method);
    Ok(Outcome::report(0, &report, human))
}

fn zn(a: &ZnArgs) -> Result<Outcome> {
    let g = graph_of(&a.shift)?;
    let f = load_potential(&a.potential, &g)?.potential;
    let w = g.parse_word(&a.word)?;
    let t = partition_function(&g, &f, &w, a.n_max)?;
    let p = pressure_spectral(&g, &f)?.value;
    let mut buf = Vec::new();
    t.write_csv(&mut buf, Some(p))?;
    let csv = String::from_utf8(buf).expect("csv is utf-8");
    let mut human = format!("{} rows, pressure {p:.12}\n", t.entries.len());
    if let Some(n) = t.truncated_at {
        let _ = writeln!(human, "budget reached at n = {n}");
    }
    match &a.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| ShiftError::Io(format!("{}: {e}", path.display())))?;
            Ok(Outcome { code: 0, stdout: String::new(), stderr: human })
        }
        None => Ok(Outcome { code: 0, stdout: csv, stderr: human }),
    }
}

fn induced(g: &FiniteGraph, word: &str, word2: Option<&str>, maxlen: usize, from_base: bool) -> Result<InducedPresentation> {
    let w1 = g.parse_word(word)?;
    let w2 = match word2 {
        Some(w) => g.parse_word(w)?,
        None => w1.clone(),
    };
    if from_base {
        induce_from_base(g, &w1, &w2, maxlen)
    } else {
        induce(g, &w1, &w2, maxlen)
    }
}

fn interval_text(i: &crate::thermo::Interval) -> String {
    let show = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x:.12}") };
    format!("[{}, {}]", show(i.lower), show(i.upper))
}

fn classify(a: &ClassifyArgs) -> Result<Outcome> {
    let ls = match (&a.loops, &a.shift) {
        (Some(p), _) => match load_shift(p)? {
            ShiftPresentation::Loops(ls) => ls,
            _ => return Err(ShiftError::Schema("--loops expects a loops document".into())),
        },
        (None, Some(s)) => {
            let g = graph_of(s)?;
            let ind = induced(&g, a.word.as_deref().unwrap_or_default(), a.word2.as_deref(), a.maxlen, a.from_base)?;
            lift_loops(&ind, &potential_or_zero(a.potential.as_deref(), &g)?)?
        }
        (None, None) => return Err(ShiftError::InvalidArgument("give --loops or --shift with --word".into())),
    };
    let c = recurrence_classify(&ls)?;
    let report = json!({
        "command": "classify",
        "class": c,
        "log_lambda": c.log_lambda().map(num),
        "explicit_len": ls.explicit_len,
        "loops": ls.loops.len(),
    });
    let mut human = format!("verdict  {}\n", serde_json::to_value(c.verdict).expect("enum").as_str().unwrap_or_default());
    let _ = writeln!(human, "F        {}", interval_text(&c.f_value));
    let _ = writeln!(human, "F'       {}", interval_text(&c.f_derivative));
    if let Some(l) = &c.lambda {
        let _ = writeln!(human, "lambda   {}", interval_text(l));
    }
    Ok(Outcome::report(0, &report, human))
}

fn zeta(shift: &Path, order: usize, potential: Option<&Path>) -> Result<Outcome> {
    let g = graph_of(shift)?;
    let f = potential_or_zero(potential, &g)?;
    let t = partition_function(&g, &f, &[], order)?;
    let z = zeta_series(&t, order)?;
    let (coeffs, text): (Vec<Value>, Vec<String>) = match &z {
        ZetaSeries::Exact(c) => c.iter().map(|q| (json!(q.to_string()), q.to_string())).unzip(),
        ZetaSeries::Float(c) => c.iter().map(|&x| (num(x), format!("{x}"))).unzip(),
    };
    let report = json!({"command": "zeta", "coefficients": coeffs, "exact": z.is_exact(), "order": order});
    Ok(Outcome::report(0, &report, format!("{}\n", text.join(", "))))
}

fn equilibrium(shift: &Path, potential: &Path, out: Option<&Path>) -> Result<Outcome> {
    let g = graph_of(shift)?;
    let f = load_potential(potential, &g)?.potential;
    let mu = equilibrium_measure(&g, &f)?;
    let p = pressure_spectral(&g, &f)?;
    let mp = measure_pressure(&mu, &f)?;
    let doc = emit_measure(&mu);
    if let Some(path) = out {
        std::fs::write(path, to_canonical_string(&doc)).map_err(|e| ShiftError::Io(format!("{}: {e}", path.display())))?;
    }
    let report = json!({
        "command": "equilibrium",
        "measure": doc,
        "entropy": est(mu.entropy(), 1e-12),
        "measure_pressure": est(mp, (mp - p.value).abs() + p.error),
        "pressure": estimate_json(&p),
        "stationarity_residual": num(mu.stationarity_residual()),
        "max_row_error": num(mu.max_row_error()),
    });
    let human = format!("entropy  {:.12}\npressure {:.12}\nh + ∫f   {mp:.12}\n", mu.entropy(), p.value);
    Ok(Outcome::report(0, &report, human))
}

fn tail_kind(t: &LoopTail) -> &'static str {
    match t {
        LoopTail::Zero => "zero",
        LoopTail::Geometric { .. } => "geometric",
        LoopTail::Polynomial { .. } => "polynomial",
        LoopTail::Transfer(_) => "transfer",
        LoopTail::Truncated => "truncated",
    }
}

fn induce_cmd(a: &InduceArgs) -> Result<Outcome> {
    let g = graph_of(&a.shift)?;
    let ind = induced(&g, &a.word, a.word2.as_deref(), a.maxlen, a.from_base)?;
    let doc = match &a.potential {
        Some(p) => load_potential(p, &g)?,
        None => PotentialDocument { potential: FiniteRangePotential::zero(&g), certificate: None },
    };
    let ls = lift_loops(&ind, &doc.potential)?;
    let loops_doc = emit_loops(&ls);
    if let Some(path) = &a.out {
        std::fs::write(path, to_canonical_string(&loops_doc)).map_err(|e| ShiftError::Io(format!("{}: {e}", path.display())))?;
    }
    let mut code = 0;
    let zn = match a.check_zn {
        Some(n) => {
            let w = g.parse_word(&a.word)?;
            let c = verify_zn_coincidence(&g, &doc.potential, &w, &ind, n)?;
            if !c.holds() {
                code = 1;
            }
            Some(c)
        }
        None => None,
    };
    let tails: Vec<Value> = ls
        .tails
        .iter()
        .map(|(&(i, j), t)| json!({"from": ls.names[i], "to": ls.names[j], "kind": tail_kind(t)}))
        .collect();
    let report = json!({
        "command": "induce",
        "block_len": ind.block_len(),
        "words": ind.words.iter().map(|w| g.format_word(w)).collect::<Vec<_>>(),
        "offset_l": ind.offset_l,
        "offset_m": ind.offset_m,
        "labeled": ind.is_labeled(),
        "loops": loops_doc,
        "tails": tails,
        "zn_coincidence": zn,
    });
    let human = format!(
        "N = {}, L = {}, M = {}, {} loop entries up to length {}{}\n",
        ind.block_len(),
        ind.offset_l,
        ind.offset_m,
        ls.loops.len(),
        ls.explicit_len,
        match (&zn, code) {
            (Some(_), 0) => ", Z_n coincide",
            (Some(_), _) => ", Z_n MISMATCH",
            _ => "",
        }
    );
    Ok(Outcome::report(code, &report, human))
}

fn witness_json(code: &OneBlockCode, w: &MagicWitness) -> Value {
    let (src, tgt) = (code.source(), code.target());
    let mut v = match w {
        MagicWitness::Ambiguous { c, wcw, x, x_prime, origin, window_start, window_len } => json!({
            "kind": "ambiguous",
            "c": tgt.format_word(c),
            "wcw": tgt.format_word(wcw),
            "x": src.format_word(x),
            "x_prime": src.format_word(x_prime),
            "image_x": tgt.format_word(&code.apply_unchecked(x)),
            "image_x_prime": tgt.format_word(&code.apply_unchecked(x_prime)),
            "origin": origin,
            "window_start": window_start,
            "window_len": window_len,
        }),
        MagicWitness::NoPreimage { point } => json!({"kind": "no_preimage", "point": tgt.format_word(point)}),
    };
    v["sound"] = json!(check_witness(code, w));
    v
}

fn verify_magic_cmd(a: &MagicArgs) -> Result<Outcome> {
    let code = load_code(&a.code)?;
    let w = code.target().parse_word(&a.word)?;
    let cert = verify_magic_with_budget(&code, &w, a.offset, a.depth, a.budget)?;
    let (exit, tag, reached) = match cert.status {
        MagicStatus::Certified => (0, "certified", Some(cert.depth)),
        MagicStatus::Refuted => (1, "refuted", None),
        MagicStatus::BudgetExceeded { reached_depth } => (2, "budget_exceeded", reached_depth),
    };
    let report = json!({
        "command": "verify-magic",
        "word": code.target().format_word(&cert.word),
        "offset": cert.offset,
        "depth": cert.depth,
        "status": tag,
        "reached_depth": reached,
        "witness": cert.witness.as_ref().map(|w| witness_json(&code, w)),
        "words_checked": cert.words_checked,
        "periodic_checked": cert.periodic_checked,
    });
    let mut human = format!("{tag}: W = {}, I = {}, D = {}\n", a.word, a.offset, a.depth);
    if let Some(MagicWitness::Ambiguous { x, x_prime, .. }) = &cert.witness {
        let _ = writeln!(human, "x = {}, x' = {}", code.source().format_word(x), code.source().format_word(x_prime));
    }
    if let Some(MagicWitness::NoPreimage { point }) = &cert.witness {
        let _ = writeln!(human, "({})^inf has no preimage", code.target().format_word(point));
    }
    Ok(Outcome::report(exit, &report, human))
}

fn transport_options(sample: bool, budget: usize, seed: Option<u64>, conjugacy: bool) -> Result<TransportOptions> {
    if (sample || !conjugacy) && seed.is_none() {
        return Err(ShiftError::InvalidArgument("sampling transport requires --seed".into()));
    }
    Ok(TransportOptions { budget, seed, force_sampling: sample })
}

fn transport(a: &TransportArgs) -> Result<Outcome> {
    let ai = load_ai(&a.ai)?;
    let mu = load_measure(&a.measure, ai.source())?;
    let opts = transport_options(a.sample, a.budget, a.seed, ai.is_conjugacy())?;
    let r = transport_measure(&ai, &mu, a.order, &opts)?;
    let doc = emit_measure(&r.measure);
    if let Some(path) = &a.out {
        std::fs::write(path, to_canonical_string(&doc)).map_err(|e| ShiftError::Io(format!("{}: {e}", path.display())))?;
    }
    let target_entropy = match r.entropy_halfwidth {
        Some(h) => json!({"value": num(r.entropy_target), "ci95_halfwidth": num(h)}),
        None => exact(r.entropy_target),
    };
    let report = json!({
        "command": "transport",
        "method": r.method,
        "order": r.order,
        "measure": doc,
        "entropy_source": est(r.entropy_source, 1e-12),
        "entropy_target": target_entropy,
        "tv_gap": r.tv_gap.map(num),
        "seed": r.seed,
        "samples": r.samples,
    });
    let human = format!("{:?}: entropy {:.12} -> {:.12}\n", r.method, r.entropy_source, r.entropy_target);
    Ok(Outcome::report(0, &report, human))
}

fn point_json(g: &FiniteGraph, x: &EventuallyPeriodicPoint) -> Value {
    json!({"left": g.format_word(&x.left), "core": g.format_word(&x.core), "right": g.format_word(&x.right), "start": x.start})
}

fn correspondence(a: &CorrespondenceArgs) -> Result<Outcome> {
    let ai = load_ai(&a.ai)?;
    let f = load_potential(&a.f, ai.source())?.potential;
    let g = match (&a.g, a.recode) {
        (_, true) => recode_potential(&ai, &f)?,
        (Some(p), false) => load_potential(p, ai.target())?.potential,
        (None, false) => return Err(ShiftError::InvalidArgument("give --g or --recode".into())),
    };
    let transport = transport_options(a.sample, a.budget, a.seed, ai.is_conjugacy())?;
    let opts = CorrespondenceOptions { n_max: a.n_max, block_len: a.block_len, transport, ..CorrespondenceOptions::default() };
    let r = verify_correspondence(&ai, &f, &g, &opts)?;
    let witness = r.witness.as_ref().map(|w| {
        json!({
            "point": point_json(ai.source(), &w.point),
            "image": point_json(ai.target(), &w.image),
            "coordinate": w.coordinate,
            "f": num(w.f_value),
            "g": num(w.g_value),
        })
    });
    let report = json!({
        "command": "verify-correspondence",
        "pass": r.pass,
        "periodic_points": r.periodic_points,
        "heteroclinic_points": r.heteroclinic_points,
        "witness": witness,
        "pressure_source": num(r.pressure_source),
        "pressure_target": num(r.pressure_target),
        "pressure_gap": est(r.pressure_gap, 0.0),
        "pressure_tolerance": num(r.pressure_tolerance),
        "measure_gap": num(r.measure_gap),
        "measure_tolerance": num(r.measure_tolerance),
        "block_len": r.block_len,
        "transport_method": r.transport.method,
        "seed": r.transport.seed,
    });
    let mut human = format!(
        "{}: {} periodic + {} other points, pressure gap {:.3e}, measure gap {:.3e}\n",
        if r.pass { "pass" } else { "FAIL" },
        r.periodic_points,
        r.heteroclinic_points,
        r.pressure_gap,
        r.measure_gap
    );
    if let Some(w) = &r.witness {
        let _ = writeln!(
            human,
            "witness: x = ({})^inf {} ({})^inf at coordinate {}, f = {}, g(γx) = {}",
            ai.source().format_word(&w.point.left),
            ai.source().format_word(&w.point.core),
            ai.source().format_word(&w.point.right),
            w.coordinate,
            w.f_value,
            w.g_value
        );
    }
    Ok(Outcome::report(if r.pass { 0 } else { 1 }, &report, human))
}
