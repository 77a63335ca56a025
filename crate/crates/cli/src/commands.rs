//! One function per subcommand. Each command loads its inputs, computes,
//! writes artifacts through a [`Sink`], and reports whether any consistency
//! gate failed (exit code 3) as opposed to a hard error (exit code 2).

use std::fs;
use std::io::IsTerminal;
use std::path::Path;

use freelyap::io::{
    self as fio, DetDoc, DistributionDoc, DocMeta, NewmanDoc, NewmanRow, ProfileDoc,
};
use freelyap::lyapunov::{self, DetMethod};
use freelyap::measure::SpectralMeasure;
use freelyap::rmt::{run_mc, EnsembleConfig};
use freelyap::transform::{evaluate, SProduct, TransformKind};
use freelyap::verify::{self, CriterionOutcome};
use freelyap::Error;

use crate::out::Sink;
use crate::svg::{self, Series};
use crate::{
    Cli, Command, DetArgs, DetMethodArg, Format, KindArg, LyapunovArgs, McArgs, MeasureArgs,
    NewmanArgs, TransformArgs, VerifyArgs,
};

pub enum Status {
    Clean,
    GateFailed,
}

type AnyError = Box<dyn std::error::Error>;
type CmdResult = Result<Status, AnyError>;

pub fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Measure(a) => cmd_measure(cli, a),
        Command::Transform(a) => cmd_transform(cli, a),
        Command::Lyapunov(a) => cmd_lyapunov(cli, a),
        Command::Det(a) => cmd_det(cli, a),
        Command::Newman(a) => cmd_newman(cli, a),
        Command::Mc(a) => cmd_mc(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
    }
}

fn argv() -> Vec<String> {
    std::env::args().collect()
}

fn read_input(path: &Path) -> Result<String, AnyError> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()).into())
}

fn probability_from_text(text: &str) -> Result<SpectralMeasure, AnyError> {
    let mu = fio::measure_from_json(text)?;
    let mass = mu.total_mass();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "the exponent pipeline needs a probability law; `{}` has total mass {mass}",
            mu.label()
        ))
        .into());
    }
    Ok(mu)
}

fn cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

fn cmd_measure(cli: &Cli, a: &MeasureArgs) -> CmdResult {
    let sources =
        [a.mp.is_some(), a.point.is_some(), a.atoms.is_some(), a.input.is_some()]
            .iter()
            .filter(|&&s| s)
            .count();
    if sources != 1 {
        return Err(Error::InvalidConfig(
            "pick exactly one source: --mp, --point, --atoms, or --input".into(),
        )
        .into());
    }
    let mu = if let Some(lambda) = a.mp {
        match a.compress {
            Some(t) => SpectralMeasure::compressed_mp(t, lambda)?,
            None => SpectralMeasure::mp(lambda)?,
        }
    } else if let Some(x) = a.point {
        SpectralMeasure::point_mass(x)?
    } else if let Some(pairs) = &a.atoms {
        parse_atomic(pairs)?
    } else {
        let text = read_input(a.input.as_ref().expect("source checked above"))?;
        fio::measure_from_json(&text)?
    };
    let doc = fio::measure_to_json(&mu);
    let mut sink = Sink::new(&cli.out, argv(), doc.as_bytes())?;
    let path = sink.write_primary("measure.json", &doc)?;
    println!(
        "{}: mass {}, {} atom(s), {} segment(s) -> {}",
        mu.label(),
        mu.total_mass(),
        mu.atoms().len(),
        mu.segments().len(),
        path.display()
    );
    sink.finish()?;
    Ok(Status::Clean)
}

fn parse_atomic(pairs: &str) -> Result<SpectralMeasure, AnyError> {
    let mut points = Vec::new();
    for pair in pairs.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (x, mass) = pair
            .split_once(':')
            .ok_or_else(|| format!("atom `{pair}` is not of the form x:mass"))?;
        points.push((
            x.trim()
                .parse::<f64>()
                .map_err(|e| format!("atom location `{x}`: {e}"))?,
            mass.trim()
                .parse::<f64>()
                .map_err(|e| format!("atom mass `{mass}`: {e}"))?,
        ));
    }
    Ok(SpectralMeasure::from_atoms(&points, "atomic")?)
}

fn parse_point_list(list: &str) -> Result<Vec<f64>, AnyError> {
    let mut zs = Vec::new();
    for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        zs.push(
            tok.parse::<f64>()
                .map_err(|e| format!("point `{tok}`: {e}"))?,
        );
    }
    Ok(zs)
}

fn cmd_transform(cli: &Cli, a: &TransformArgs) -> CmdResult {
    let mut texts = Vec::new();
    for path in &a.input {
        texts.push(read_input(path)?);
    }
    let measures: Vec<SpectralMeasure> = texts
        .iter()
        .map(|t| probability_from_text(t))
        .collect::<Result<_, _>>()?;

    let zs = if let Some(list) = &a.points {
        parse_point_list(list)?
    } else if let Some(range) = &a.range {
        let lo: f64 = range[0]
            .parse()
            .map_err(|e| format!("range LO `{}`: {e}", range[0]))?;
        let hi: f64 = range[1]
            .parse()
            .map_err(|e| format!("range HI `{}`: {e}", range[1]))?;
        let count: usize = range[2]
            .parse()
            .map_err(|e| format!("range COUNT `{}`: {e}", range[2]))?;
        if count < 2 || hi <= lo {
            return Err(
                Error::InvalidConfig("range needs HI > LO and COUNT >= 2".into()).into(),
            );
        }
        (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect()
    } else {
        return Err(Error::InvalidConfig(
            "no evaluation points; pass --points or --range".into(),
        )
        .into());
    };

    let kind_name = match a.kind {
        KindArg::Cauchy => "cauchy",
        KindArg::Psi => "psi",
        KindArg::PsiInverse => "psi-inverse",
        KindArg::S => "s",
    };
    // (argument, value, achieved error; NaN marks "not tracked").
    let mut rows: Vec<(f64, f64, f64)> = Vec::with_capacity(zs.len());
    if measures.len() > 1 {
        if a.kind != KindArg::S {
            return Err(Error::InvalidConfig(
                "multiple inputs are only meaningful for --kind s (free product)".into(),
            )
            .into());
        }
        let product = SProduct::new(measures)?;
        for &z in &zs {
            rows.push((z, product.s(z)?, f64::NAN));
        }
    } else {
        let kind = match a.kind {
            KindArg::Cauchy => TransformKind::Cauchy,
            KindArg::Psi => TransformKind::Psi,
            KindArg::PsiInverse => TransformKind::PsiInverse,
            KindArg::S => TransformKind::STransform,
        };
        for &z in &zs {
            let point = evaluate(&measures[0], kind, z)?;
            rows.push((z, point.value, point.achieved_error));
        }
    }

    let config: Vec<u8> = texts.concat().into_bytes();
    let mut sink = Sink::new(&cli.out, argv(), &config)?;
    match cli.format {
        Format::Csv | Format::Svg => {
            let mut csv = String::from("kind,argument,value,achieved_error\n");
            for &(z, v, e) in &rows {
                csv.push_str(&format!("{kind_name},{},{},{}\n", cell(z), cell(v), cell(e)));
            }
            sink.write("transform.csv", &csv)?;
            if cli.format == Format::Svg {
                let pts: Vec<(f64, f64)> = rows.iter().map(|&(z, v, _)| (z, v)).collect();
                let chart = svg::line_chart(
                    kind_name,
                    "argument",
                    "value",
                    &[Series { label: kind_name, points: &pts }],
                );
                sink.write("transform.svg", &chart)?;
            }
        }
        Format::Json => {
            let doc = serde_json::json!({
                "schema_version": fio::SCHEMA_VERSION,
                "kind": kind_name,
                "rows": rows.iter().map(|&(z, v, e)| serde_json::json!({
                    "argument": z,
                    "value": v,
                    "achieved_error": if e.is_nan() {
                        serde_json::Value::Null
                    } else {
                        serde_json::Value::from(e)
                    },
                })).collect::<Vec<_>>(),
            });
            sink.write_primary("transform.json", &serde_json::to_string_pretty(&doc)?)?;
        }
    }
    for &(z, v, _) in &rows {
        println!("{kind_name}({z}) = {v}");
    }
    sink.finish()?;
    Ok(Status::Clean)
}

fn cmd_lyapunov(cli: &Cli, a: &LyapunovArgs) -> CmdResult {
    let text = read_input(&a.input)?;
    let mu = probability_from_text(&text)?;
    let profile = lyapunov::lyapunov_profile(&mu, a.grid)?;
    let mut sink = Sink::new(&cli.out, argv(), text.as_bytes())?;

    match cli.format {
        Format::Csv => {
            sink.write("profile.csv", &fio::profile_csv(&profile))?;
        }
        Format::Json => {
            let doc = ProfileDoc {
                schema_version: fio::SCHEMA_VERSION,
                profile: profile.clone(),
                meta: DocMeta::for_measure(&mu, &[]),
            };
            sink.write_primary("profile.json", &serde_json::to_string_pretty(&doc)?)?;
        }
        Format::Svg => {
            sink.write("profile.csv", &fio::profile_csv(&profile))?;
            let f_pts: Vec<(f64, f64)> = profile
                .t_grid
                .iter()
                .zip(&profile.f_values)
                .map(|(&t, &f)| (t, f))
                .collect();
            let big_pts: Vec<(f64, f64)> = profile
                .t_grid
                .iter()
                .zip(&profile.big_f_values)
                .map(|(&t, &v)| (t, v))
                .collect();
            let chart = svg::line_chart(
                &format!("exponent profile of {}", mu.label()),
                "t",
                "exponent",
                &[
                    Series { label: "marginal f", points: &f_pts },
                    Series { label: "integrated F", points: &big_pts },
                ],
            );
            sink.write("profile.svg", &chart)?;
        }
    }

    if a.dist {
        let grid = match &a.x_points {
            Some(list) => Some(parse_point_list(list)?),
            None => None,
        };
        let dist = lyapunov::exponent_distribution(&mu, grid.as_deref())?;
        match cli.format {
            Format::Csv => {
                sink.write("distribution.csv", &fio::distribution_csv(&dist))?;
            }
            Format::Json => {
                let doc = DistributionDoc {
                    schema_version: fio::SCHEMA_VERSION,
                    distribution: dist.clone(),
                    meta: DocMeta::for_measure(&mu, &[]),
                };
                sink.write("distribution.json", &serde_json::to_string_pretty(&doc)?)?;
            }
            Format::Svg => {
                sink.write("distribution.csv", &fio::distribution_csv(&dist))?;
                let pts: Vec<(f64, f64)> = dist
                    .x_grid
                    .iter()
                    .zip(&dist.cdf)
                    .map(|(&x, &p)| (x, p))
                    .collect();
                let chart = svg::line_chart(
                    &format!("exponent distribution of {}", mu.label()),
                    "threshold",
                    "fraction",
                    &[Series { label: "cdf", points: &pts }],
                );
                sink.write("distribution.svg", &chart)?;
            }
        }
    }

    println!(
        "profile of {}: {} grid points, rank {}",
        mu.label(),
        profile.t_grid.len(),
        profile.rank_r
    );
    sink.finish()?;
    Ok(Status::Clean)
}

fn cmd_det(cli: &Cli, a: &DetArgs) -> CmdResult {
    let text = read_input(&a.input)?;
    let mu = probability_from_text(&text)?;
    let mut results = Vec::new();
    match a.method {
        DetMethodArg::Definition => {
            results.push(lyapunov::fk_determinant(&mu, DetMethod::Definition)?);
        }
        DetMethodArg::SIntegral => {
            results.push(lyapunov::fk_determinant(&mu, DetMethod::SIntegral)?);
        }
        DetMethodArg::Both => {
            results.push(lyapunov::fk_determinant(&mu, DetMethod::Definition)?);
            match lyapunov::fk_determinant(&mu, DetMethod::SIntegral) {
                Ok(r) => results.push(r),
                Err(Error::Precondition(msg)) => {
                    eprintln!("note: profile-integral route skipped: {msg}");
                }
                Err(e) => return Err(e.into()),
            }
        }
    }

    for r in &results {
        let method = match r.method {
            DetMethod::Definition => "definition",
            DetMethod::SIntegral => "s-integral",
        };
        let log = match r.log_det.finite() {
            Some(v) => format!("{v:.15}"),
            None => "-inf".into(),
        };
        println!("{method}: det = {:.15} (log {log})", r.det);
    }

    let mut gate_failed = false;
    if results.len() == 2 {
        let (d0, d1) = (results[0].det, results[1].det);
        let rel = (d0 - d1).abs() / d0.abs().max(d1.abs()).max(f64::MIN_POSITIVE);
        if rel > cli.tol {
            eprintln!(
                "gate: determinant routes disagree by {rel:.3e} relative (tolerance {:.1e})",
                cli.tol
            );
            gate_failed = true;
        }
    }

    let doc = DetDoc {
        schema_version: fio::SCHEMA_VERSION,
        results,
        meta: DocMeta::for_measure(&mu, &[("route_agreement", cli.tol)]),
    };
    let mut sink = Sink::new(&cli.out, argv(), text.as_bytes())?;
    sink.write_primary("det.json", &serde_json::to_string_pretty(&doc)?)?;
    sink.finish()?;
    Ok(if gate_failed { Status::GateFailed } else { Status::Clean })
}

fn cmd_newman(cli: &Cli, a: &NewmanArgs) -> CmdResult {
    let text = read_input(&a.input)?;
    let mu = probability_from_text(&text)?;
    let lo = a.x_min.unwrap_or(0.05);
    let hi = a.x_max.unwrap_or_else(|| mu.sup_support().sqrt() + 0.05);
    let n = a.points;
    if !lo.is_finite() || lo <= 0.0 || hi <= lo || n < 2 {
        return Err(Error::InvalidConfig(format!(
            "growth grid needs 0 < x-min < x-max and at least 2 points, \
             got [{lo}, {hi}] with {n}"
        ))
        .into());
    }

    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let h = lyapunov::newman_solve(&mu, x)?;
        let cdf_at_log_x = lyapunov::exponent_cdf(&mu, x.ln())?;
        rows.push(NewmanRow { x, h, cdf_at_log_x, abs_diff: (h - cdf_at_log_x).abs() });
    }
    let worst = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);

    let mut sink = Sink::new(&cli.out, argv(), text.as_bytes())?;
    match cli.format {
        Format::Csv => {
            sink.write("newman.csv", &fio::newman_csv(&rows))?;
        }
        Format::Json => {
            let doc = NewmanDoc {
                schema_version: fio::SCHEMA_VERSION,
                rows: rows.clone(),
                meta: DocMeta::for_measure(&mu, &[("consistency", cli.tol)]),
            };
            sink.write_primary("newman.json", &serde_json::to_string_pretty(&doc)?)?;
        }
        Format::Svg => {
            sink.write("newman.csv", &fio::newman_csv(&rows))?;
            let h_pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.x, r.h)).collect();
            let cdf_pts: Vec<(f64, f64)> =
                rows.iter().map(|r| (r.x, r.cdf_at_log_x)).collect();
            let chart = svg::line_chart(
                &format!("growth thresholds of {}", mu.label()),
                "x",
                "fraction",
                &[
                    Series { label: "H(x)", points: &h_pts },
                    Series { label: "cdf(ln x)", points: &cdf_pts },
                ],
            );
            sink.write("newman.svg", &chart)?;
        }
    }

    println!(
        "max |H - distribution(ln x)| = {worst:.3e} over {n} points in [{lo}, {hi}]"
    );
    sink.finish()?;
    if worst > cli.tol {
        eprintln!(
            "gate: threshold equation and distribution disagree by {worst:.3e} \
             (tolerance {:.1e})",
            cli.tol
        );
        return Ok(Status::GateFailed);
    }
    Ok(Status::Clean)
}

fn cmd_mc(cli: &Cli, a: &McArgs) -> CmdResult {
    let text = read_input(&a.config)?;
    let mut cfg = EnsembleConfig::from_json(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let effective = cfg.to_json();
    let mut sink = Sink::new(&cli.out, argv(), effective.as_bytes())?;

    let report = run_mc(&cfg)?;
    sink.write_primary("report.json", &serde_json::to_string_pretty(&report)?)?;
    let with_tables = matches!(cli.format, Format::Csv | Format::Svg);
    if with_tables && !report.empirical_exponents.is_empty() {
        sink.write("exponents.csv", &fio::exponents_csv(&report))?;
    }
    if cli.format == Format::Svg && !report.empirical_exponents.is_empty() {
        let mut ascending = report.empirical_exponents.clone();
        ascending.reverse();
        let count = ascending.len();
        let mut stair = Vec::with_capacity(2 * count);
        for (i, &x) in ascending.iter().enumerate() {
            stair.push((x, i as f64 / count as f64));
            stair.push((x, (i + 1) as f64 / count as f64));
        }
        let analytic: Option<Vec<(f64, f64)>> = match cfg.singular_law.analytic_measure()? {
            Some(mu) => {
                let lo = ascending[0];
                let hi = ascending[count - 1];
                let pad = 0.05 * (hi - lo).max(1e-6);
                Some(
                    (0..=200)
                        .map(|i| {
                            let x = lo - pad + (hi - lo + 2.0 * pad) * i as f64 / 200.0;
                            let y = lyapunov::exponent_cdf(&mu, x).unwrap_or(f64::NAN);
                            (x, y)
                        })
                        .collect(),
                )
            }
            None => None,
        };
        let mut series = vec![Series { label: "empirical", points: &stair }];
        if let Some(pts) = &analytic {
            series.push(Series { label: "analytic", points: pts });
        }
        let chart = svg::line_chart(
            &format!("exponent distribution, n={} steps={}", cfg.n, cfg.steps),
            "exponent",
            "fraction",
            &series,
        );
        sink.write("spectrum.svg", &chart)?;
    }

    println!(
        "{}: n={} steps={} trials={} seed={} ({:.2}s)",
        if cfg.label.is_empty() { "mc" } else { &cfg.label },
        cfg.n,
        cfg.steps,
        cfg.trials,
        cfg.seed,
        report.wall_time_seconds
    );
    if let Some(ks) = report.ks_distance {
        println!("spectrum distance to the analytic law: {ks:.4}");
    }
    for g in &report.growth_rates {
        match g.analytic {
            Some(f) => println!(
                "growth t={}: rate {:.6}, analytic {:.6}",
                g.t, g.rate, f
            ),
            None => println!("growth t={}: rate {:.6}", g.t, g.rate),
        }
    }
    for c in &report.compression {
        let ks = c
            .ks
            .map(|k| format!(", distance {k:.4}"))
            .unwrap_or_default();
        println!(
            "compression t={}: {} eigenvalues in [{:.4}, {:.4}]{ks}",
            c.t, c.samples, c.support_min, c.support_max
        );
    }
    for g in &report.gate_failures {
        eprintln!("gate: {g}");
    }
    let clean = report.gate_failures.is_empty();
    sink.finish()?;
    Ok(if clean { Status::Clean } else { Status::GateFailed })
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> CmdResult {
    const TABLE: [(u32, fn() -> CriterionOutcome); 11] = [
        (1, verify::criterion_01),
        (2, verify::criterion_02),
        (3, verify::criterion_03),
        (4, verify::criterion_04),
        (5, verify::criterion_05),
        (6, verify::criterion_06),
        (7, verify::criterion_07),
        (8, verify::criterion_08),
        (9, verify::criterion_09),
        (10, verify::criterion_10),
        (11, verify::criterion_11),
    ];
    if let Some(ids) = &a.only {
        if let Some(bad) = ids.iter().find(|id| !(1..=11).contains(*id)) {
            return Err(
                Error::InvalidConfig(format!("unknown criterion id {bad}")).into()
            );
        }
    }
    let color = std::io::stdout().is_terminal()
        && std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty());

    let mut outcomes = Vec::new();
    for (id, criterion) in TABLE {
        if a.only.as_ref().is_some_and(|ids| !ids.contains(&id)) {
            continue;
        }
        let outcome = criterion();
        let line = outcome.line();
        if color {
            let painted = if outcome.passed {
                line.replacen("PASS", "\x1b[32mPASS\x1b[0m", 1)
            } else {
                line.replacen("FAIL", "\x1b[31mFAIL\x1b[0m", 1)
            };
            println!("{painted}");
        } else {
            println!("{line}");
        }
        outcomes.push(outcome);
    }

    let doc = verify::VerifyDoc::new(outcomes);
    let json = doc.to_json();
    let mut sink = Sink::new(&cli.out, argv(), json.as_bytes())?;
    sink.write_primary("verify.json", &json)?;
    sink.finish()?;
    println!(
        "{}",
        if doc.passed { "all criteria passed" } else { "verification FAILED" }
    );
    Ok(if doc.passed { Status::Clean } else { Status::GateFailed })
}
