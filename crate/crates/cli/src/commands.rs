use std::fs;
use std::io::Read;
use std::path::Path;
use std::process::ExitCode;

use splitlr::config::ScenarioConfig;
use splitlr::diagnostics::{
    gumbel_standardize_lambda, gumbel_standardize_m, null_distribution, process_supremum, that_uniformity_report,
    uniformity_report_on, IntervalA2, NullStatistic, UniformityReport,
};
use splitlr::likelihood::{lrt_contaminated, lrt_two_mean};
use splitlr::simulation::{bundled_reference, report_json, CellVerdict, TABLE_GAMMAS, TABLE_M0};
use splitlr::universal::{
    lrt_test, slrt_contaminated_statistic, slrt_two_mean_statistic, threshold, universal_threshold, MIN_ASYMPTOTIC_N,
};
use splitlr::{
    compare_to_reference, run_experiment, AlternativeScenario, CaseId, ExperimentSpec, FittedParams, MethodSpec,
    SimReport, SplitConfig, TestResult, ThresholdRule,
};

use crate::args::{
    Cli, Command, DiagnoseCommand, Method, Model, NullArgs, ProcessArgs, SimulateArgs, TestArgs, ThresholdArgs,
    UniformityArgs,
};
use crate::render::{Field, Format, Table};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or unreadable input; exit code 2.
    Usage(String),
    Core(splitlr::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_precondition() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<splitlr::Error> for CliError {
    fn from(e: splitlr::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate(args) => return cmd_simulate(&args),
        Command::Test(args) => cmd_test(&args),
        Command::Nulldist(args) => cmd_nulldist(&args),
        Command::Thresholds(args) => cmd_thresholds(&args),
        Command::Diagnose(DiagnoseCommand::Process(args)) => cmd_process(&args),
        Command::Diagnose(DiagnoseCommand::Uniformity(args)) => cmd_uniformity(&args),
    }?;
    Ok(ExitCode::SUCCESS)
}

/// Reads one number per line; blank lines are skipped.
pub fn read_data(path: &Path) -> Result<Vec<f64>> {
    let name = path.display();
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Usage(format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{name}: {e}")))?
    };
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(x) if x.is_finite() => values.push(x),
            _ => {
                return Err(CliError::Usage(format!(
                    "{name}:{}: `{line}` is not a finite number",
                    i + 1
                )))
            }
        }
    }
    Ok(values)
}

fn write_or_print(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_test(args: &TestArgs) -> Result<()> {
    let data = read_data(&args.data)?;
    let n = data.len();
    let rule = args.rule.unwrap_or(match args.method {
        Method::Lrt => ThresholdRule::AsymptoticLrt,
        Method::Slrt => ThresholdRule::Universal,
    });
    let mut split = SplitConfig::new(args.m0)?;
    if let Some(seed) = args.shuffle_seed {
        split = split.shuffled(seed);
    }

    let (result, fit): (TestResult, FittedParams) = match args.method {
        Method::Lrt => {
            let fit = match args.model {
                Model::Contaminated => lrt_contaminated(&data)?,
                Model::TwoMean => lrt_two_mean(&data, args.restarts, args.seed)?,
            };
            (lrt_test(&fit, n, args.alpha, rule, Some(args.m0))?, fit.params)
        }
        Method::Slrt => {
            let stat = match args.model {
                Model::Contaminated => slrt_contaminated_statistic(&data, &split)?,
                Model::TwoMean => slrt_two_mean_statistic(&data, &split, args.restarts, args.seed)?,
            };
            let c = threshold(rule, n, args.alpha, Some(args.m0))?;
            (TestResult::decide(stat.statistic, rule, c, args.alpha, true), stat.fit.params)
        }
    };

    let mut fields: Vec<(&str, Field)> = vec![
        (
            "model",
            match args.model {
                Model::Contaminated => "contaminated",
                Model::TwoMean => "two-mean",
            }
            .into(),
        ),
        (
            "method",
            match args.method {
                Method::Lrt => "LRT",
                Method::Slrt => "SLRT",
            }
            .into(),
        ),
        ("n", n.into()),
        ("statistic", result.statistic.into()),
        ("rule", result.threshold_rule.to_string().into()),
        ("threshold", result.threshold.into()),
        ("reject", result.reject.into()),
        ("e_value", Field::opt(result.e_value)),
        ("alpha", result.alpha.into()),
    ];
    match fit {
        FittedParams::Contaminated(p) => {
            fields.push(("p_hat", p.p.into()));
            fields.push(("t_hat", p.t.into()));
        }
        FittedParams::TwoMean(p) => {
            fields.push(("p_hat", p.p.into()));
            fields.push(("t1_hat", p.t1.into()));
            fields.push(("t2_hat", p.t2.into()));
        }
    }
    print!("{}", Table::record(fields).render(args.format));
    Ok(())
}

fn simulate_spec(args: &SimulateArgs) -> Result<ExperimentSpec> {
    let base = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            Some(ScenarioConfig::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let case = match (args.case, &base) {
        (Some(c), _) => c,
        (None, Some(cfg)) => cfg.case.parse::<CaseId>().map_err(|e| CliError::Usage(e.to_string()))?,
        (None, None) => return Err(CliError::Usage("simulate needs --case or --config".into())),
    };
    let pick = |flag: Option<f64>, cfg: Option<f64>, default: f64| flag.or(cfg).unwrap_or(default);
    let cfg = base.as_ref();
    let default_reps = if case == CaseId::III && !args.full { 200 } else { 1000 };
    let n = args.n.or(cfg.and_then(|c| c.n)).unwrap_or_else(|| case.default_n());
    let m0 = args
        .m0
        .clone()
        .or_else(|| cfg.and_then(|c| c.m0.clone()))
        .unwrap_or_else(|| TABLE_M0.to_vec());
    let spec = ExperimentSpec {
        scenario: AlternativeScenario::new(case, 0.0, n).with_mu(pick(args.mu, cfg.and_then(|c| c.mu), 1.0)),
        gamma_list: args
            .gamma
            .clone()
            .or_else(|| cfg.and_then(|c| c.gamma.clone()))
            .unwrap_or_else(|| TABLE_GAMMAS.to_vec()),
        methods: MethodSpec::table_set(&m0),
        reps: args.reps.map(|r| r as usize).or(cfg.map(|c| c.reps)).unwrap_or(default_reps),
        alpha: pick(args.alpha, cfg.and_then(|c| c.alpha), 0.05),
        seed: args.seed.or(cfg.map(|c| c.seed)).unwrap_or(1),
        em_restarts: args
            .em_restarts
            .or(cfg.and_then(|c| c.em_restarts))
            .unwrap_or(splitlr::likelihood::DEFAULT_RESTARTS),
        threads: args.threads.or(cfg.and_then(|c| c.threads)),
    };
    spec.validate()?;
    Ok(spec)
}

/// Report pivoted like the reference tables: one row per method, one
/// column per gamma.
fn report_markdown(report: &SimReport, spec: &ExperimentSpec) -> String {
    let gamma_headers: Vec<String> = spec.gamma_list.iter().map(|g| format!("gamma={g}")).collect();
    let mut headers = vec!["method", "m0", "rule"];
    headers.extend(gamma_headers.iter().map(String::as_str));
    let mut table = Table::new(&headers);
    for m in &spec.methods {
        let mut row = vec![m.kind.to_string().into(), Field::opt(m.m0), m.rule.to_string().into()];
        for &g in &spec.gamma_list {
            row.push(Field::opt(report.row(m.kind, m.m0, m.rule, g).map(|r| r.frequency)));
        }
        table.push(row);
    }
    format!(
        "case {}, n = {}, reps = {}, alpha = {}, seed = {}\n\n{}",
        report.case,
        report.n,
        report.reps,
        report.alpha,
        report.seed,
        table.to_markdown()
    )
}

fn verdict_table(verdicts: &[CellVerdict]) -> Table {
    let mut t = Table::new(&["case", "method", "m0", "rule", "gamma", "observed", "reference", "band", "pass"]);
    for v in verdicts {
        t.push(vec![
            v.case.to_string().into(),
            v.method.to_string().into(),
            Field::opt(v.m0),
            v.rule.to_string().into(),
            v.gamma.into(),
            v.observed.into(),
            v.reference.into(),
            v.band.into(),
            v.pass.into(),
        ]);
    }
    t
}

/// Exits 1 when a comparison was requested and some cell is out of band.
fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let spec = simulate_spec(args)?;
    let report = run_experiment(&spec)?;
    let verdicts = if args.compare {
        Some(compare_to_reference(&report, &bundled_reference())?)
    } else {
        None
    };

    let body = match args.format {
        Format::Csv => report.to_csv_string()?,
        Format::Json => report_json(&report, verdicts.as_deref())? + "\n",
        Format::Markdown => report_markdown(&report, &spec),
    };
    write_or_print(args.output.as_deref(), &body)?;
    if let Some(v) = &verdicts {
        if args.format != Format::Json || args.output.is_some() {
            let sep = if args.output.is_none() { "\n" } else { "" };
            let fmt = if args.format == Format::Json { Format::Markdown } else { args.format };
            print!("{sep}{}", verdict_table(v).render(fmt));
        }
        let failed = v.iter().filter(|c| !c.pass).count();
        eprintln!("{} of {} cells within band", v.len() - failed, v.len());
        if failed > 0 {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_nulldist(args: &NullArgs) -> Result<()> {
    let m0 = (args.statistic == NullStatistic::Split).then_some(args.m0);
    let dist = null_distribution(args.statistic, args.n, m0, args.reps as usize, args.seed)?;
    if let Some(path) = &args.output {
        let file = fs::File::create(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        dist.write_csv(file)?;
    }
    let s = &dist.summary;
    let table = Table::record(vec![
        ("statistic", s.statistic.to_string().into()),
        ("n", s.n.into()),
        ("m0", Field::opt(s.m0)),
        ("reps", s.reps.into()),
        ("seed", s.seed.into()),
        ("mean", s.mean.into()),
        ("sd", s.sd.into()),
        ("standardized_mean", s.standardized_mean.into()),
        ("ks_distance", Field::opt(s.ks_distance)),
    ]);
    print!("{}", table.render(args.format));
    Ok(())
}

fn cmd_thresholds(args: &ThresholdArgs) -> Result<()> {
    let universal = universal_threshold(args.alpha)?;
    let lrt = threshold(ThresholdRule::AsymptoticLrt, args.n, args.alpha, None)?;
    let mut table = Table::new(&["n", "alpha", "m0", "universal", "asymptotic_lrt", "asymptotic_slrt"]);
    for &m0 in &args.m0 {
        let slrt = threshold(ThresholdRule::AsymptoticSlrt, args.n, args.alpha, Some(m0))?;
        table.push(vec![
            args.n.into(),
            args.alpha.into(),
            m0.into(),
            universal.into(),
            lrt.into(),
            slrt.into(),
        ]);
    }
    print!("{}", table.render(args.format));
    Ok(())
}

fn cmd_process(args: &ProcessArgs) -> Result<()> {
    let data = read_data(&args.data)?;
    let curve = process_supremum(&data)?;
    let fit = lrt_contaminated(&data)?;
    let n = data.len();
    if let Some(path) = &args.curve {
        let mut t = Table::new(&["t", "s"]);
        for (&t_i, &s_i) in curve.t_grid.iter().zip(&curve.s_values) {
            t.push(vec![t_i.into(), s_i.into()]);
        }
        fs::write(path, t.to_csv()).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    let standardized = |f: fn(f64, usize) -> splitlr::Result<f64>, x: f64| {
        if n >= MIN_ASYMPTOTIC_N {
            f(x, n).map_or(Field::Missing, Field::Num)
        } else {
            Field::Missing
        }
    };
    let table = Table::record(vec![
        ("n", n.into()),
        ("m_n", curve.m_n.into()),
        ("t_star", curve.t_star.into()),
        ("lambda", fit.lambda.into()),
        ("t_hat", Field::opt(fit.t_hat)),
        ("lambda_minus_m2", (fit.lambda - curve.m_n * curve.m_n).into()),
        ("m_standardized", standardized(gumbel_standardize_m, curve.m_n)),
        ("lambda_standardized", standardized(gumbel_standardize_lambda, fit.lambda)),
    ]);
    print!("{}", table.render(args.format));
    Ok(())
}

fn cmd_uniformity(args: &UniformityArgs) -> Result<()> {
    let reps = args.reps as usize;
    let report: UniformityReport = match (args.lower, args.upper) {
        (Some(lower), Some(upper)) => {
            if !(lower < upper) {
                return Err(CliError::Usage(format!("--lower {lower} must be below --upper {upper}")));
            }
            uniformity_report_on(IntervalA2 { lower, upper }, args.n, args.m0, reps, args.seed)?
        }
        _ => that_uniformity_report(args.n, args.m0, reps, args.seed)?,
    };
    let table = Table::record(vec![
        ("n", report.n.into()),
        ("n1", report.n1.into()),
        ("m0", report.m0.into()),
        ("reps", report.reps.into()),
        ("lower", report.interval.lower.into()),
        ("upper", report.interval.upper.into()),
        ("in_interval_fraction", report.in_interval_fraction.into()),
        ("ks_distance", Field::opt(report.ks_distance)),
    ]);
    print!("{}", table.render(args.format));
    Ok(())
}
