use disttrans::hypothesis::{k_sample_test_taus, two_sample_test_taus, Pairing, TestConfig, TwoSampleData};
use disttrans::rng::{RandomStream, GENERATE};
use disttrans::samples::{MultiSampleSet, PairedSample, UnivariateSample};
use disttrans::simulation::{generate, warp_speed_study, DgpFamily, DgpSpec, Generated, StudyPlan};
use disttrans::transforms::{ParamBox, Transform};

use crate::args::{GenArgs, KtestArgs, SimulateArgs, TestArgs, TestingArgs};
use crate::config::{
    parse_pairing, require, ColumnSource, FamilySpec, FileConfig, NuSpec, PairSource, Resolution,
};
use crate::ingest::{read_column, read_pairs};
use crate::report::{render_table, render_test, TestSummary};
use crate::{Cli, CliError, CliResult, Command, Format};

/// Runs the selected subcommand and returns its rendered output.
pub fn execute(cli: &Cli) -> CliResult<String> {
    let mut cfg = FileConfig::load(cli.common.config.as_deref())?;
    if let Some(seed) = cli.common.seed {
        cfg.seed = Some(seed);
    }
    let format = cli.common.format;
    match &cli.command {
        Command::Test(a) => cmd_test(cfg, a, format),
        Command::Ktest(a) => cmd_ktest(cfg, a, format),
        Command::Simulate(a) => cmd_simulate(cfg, a, format),
        Command::Gen(a) => cmd_gen(cfg, a),
    }
}

fn check_taus(taus: &[f64]) -> CliResult<()> {
    if taus.is_empty() {
        return Err(CliError::Config("taus must hold at least one value".into()));
    }
    if let Some(t) = taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(CliError::Config(format!("tau values must be positive, got {t}")));
    }
    Ok(())
}

fn set_resolution(cfg: &mut FileConfig, r: &Option<Vec<usize>>) {
    if let Some(r) = r {
        let m = cfg.minimize.get_or_insert_with(Default::default);
        m.resolution = Some(if r.len() == 1 { Resolution::One(r[0]) } else { Resolution::Many(r.clone()) });
    }
}

/// Applies the shared flags, fills defaults into `cfg` and returns the test
/// settings with the `τ` list.
fn complete_testing(cfg: &mut FileConfig, a: &TestingArgs) -> CliResult<(TestConfig, Vec<f64>)> {
    if let Some(t) = &a.taus {
        cfg.taus = Some(t.clone());
    }
    if a.alpha.is_some() {
        cfg.alpha = a.alpha;
    }
    if a.n_boot.is_some() {
        cfg.n_boot = a.n_boot;
    }
    if a.m_nodes.is_some() {
        cfg.m_nodes = a.m_nodes;
    }
    set_resolution(cfg, &a.resolution);
    if a.refine {
        cfg.minimize.get_or_insert_with(Default::default).refine = Some(true);
    }
    if let Some(nu) = &a.nu {
        cfg.nu = Some(NuSpec::from_flag(nu)?);
    }
    let taus = require(cfg.taus.clone(), "taus")?;
    check_taus(&taus)?;
    let config = TestConfig {
        alpha: *cfg.alpha.get_or_insert(0.05),
        tau: taus[0],
        n_boot: *cfg.n_boot.get_or_insert(1000),
        m_nodes: *cfg.m_nodes.get_or_insert(512),
        seed: *cfg.seed.get_or_insert(0),
        pairing: parse_pairing(cfg.pairing.get_or_insert_with(|| "independent".into()))?,
        minimize: cfg.minimize.get_or_insert_with(Default::default).complete()?,
        nu: cfg.nu.get_or_insert_with(|| NuSpec::Keyword("auto".into())).resolve()?,
    };
    config.validate().map_err(CliError::config)?;
    Ok((config, taus))
}

fn sample(values: Vec<f64>) -> CliResult<UnivariateSample> {
    UnivariateSample::new(values).map_err(CliError::from_run)
}

fn cmd_test(mut cfg: FileConfig, a: &TestArgs, format: Format) -> CliResult<String> {
    if let Some(path) = &a.pairs {
        let old = cfg.pairs.take();
        cfg.pairs = Some(PairSource {
            path: path.clone(),
            x: old.as_ref().and_then(|p| p.x.clone()),
            y: old.and_then(|p| p.y),
        });
    }
    if let Some(path) = &a.x {
        let column = cfg.x.take().and_then(|s| s.column);
        cfg.x = Some(ColumnSource { path: path.clone(), column });
    }
    if let Some(path) = &a.y {
        let column = cfg.y.take().and_then(|s| s.column);
        cfg.y = Some(ColumnSource { path: path.clone(), column });
    }
    if let Some(p) = &mut cfg.pairs {
        if a.x_column.is_some() {
            p.x = a.x_column.clone();
        }
        if a.y_column.is_some() {
            p.y = a.y_column.clone();
        }
    } else {
        for (src, col, flag) in
            [(&mut cfg.x, &a.x_column, "--x-column"), (&mut cfg.y, &a.y_column, "--y-column")]
        {
            if let Some(c) = col {
                let src = src
                    .as_mut()
                    .ok_or_else(|| CliError::Config(format!("{flag} given without a sample file")))?;
                src.column = Some(c.clone());
            }
        }
    }
    if let Some(p) = &a.pairing {
        cfg.pairing = Some(p.clone());
    } else if cfg.pairing.is_none() && cfg.pairs.is_some() {
        cfg.pairing = Some("matched".into());
    }
    apply_family_flags(&mut cfg, a)?;
    let (config, taus) = complete_testing(&mut cfg, &a.testing)?;
    let spec = require(cfg.family.clone(), "family")?;
    let (family, bx) = spec.build()?;
    cfg.base = None;
    cfg.compare = None;
    cfg.simulate = None;
    cfg.gen = None;

    let (results, samples) = match config.pairing {
        Pairing::Matched => {
            if cfg.x.is_some() || cfg.y.is_some() {
                return Err(CliError::Config("matched pairing reads [pairs], not [x]/[y]".into()));
            }
            let src = require(cfg.pairs.clone(), "pairs")?;
            let pairs = PairedSample::new(read_pairs(&src)?).map_err(CliError::from_run)?;
            let n = pairs.len();
            let results = two_sample_test_taus(TwoSampleData::Matched(&pairs), &family, &bx, &config, &taus)
                .map_err(CliError::from_run)?;
            (results, vec![("pairs".to_string(), n)])
        }
        Pairing::Independent => {
            if cfg.pairs.is_some() {
                return Err(CliError::Config("independent pairing reads [x] and [y], not [pairs]".into()));
            }
            let x = sample(read_column(&require(cfg.x.clone(), "x")?)?)?;
            let y = sample(read_column(&require(cfg.y.clone(), "y")?)?)?;
            let results = two_sample_test_taus(
                TwoSampleData::Independent { x: &x, y: &y },
                &family,
                &bx,
                &config,
                &taus,
            )
            .map_err(CliError::from_run)?;
            (results, vec![("n1".to_string(), x.len()), ("n2".to_string(), y.len())])
        }
    };
    let summary = TestSummary {
        command: "test",
        title: format!("two-sample {} test, {} samples", family.name(), config.pairing),
        samples,
    };
    Ok(render_test(format, &cfg, &summary, &results))
}

fn apply_family_flags(cfg: &mut FileConfig, a: &TestArgs) -> CliResult<()> {
    if a.family.is_none() && a.lower.is_none() && a.upper.is_none() {
        return Ok(());
    }
    let current = cfg.family.take();
    let pick = |flag: &Option<Vec<f64>>, old: Option<&Vec<f64>>, name: &str| {
        flag.clone()
            .or_else(|| old.cloned())
            .ok_or_else(|| CliError::Config(format!("--{name} is required when the family has no box")))
    };
    let kind = a
        .family
        .clone()
        .or_else(|| current.as_ref().map(|f| f.kind.clone()))
        .ok_or_else(|| CliError::Config("--family is required".into()))?;
    let same_kind = current.as_ref().is_some_and(|f| f.kind == kind);
    cfg.family = Some(FamilySpec {
        lower: pick(&a.lower, current.as_ref().filter(|_| same_kind).map(|f| &f.lower), "lower")?,
        upper: pick(&a.upper, current.as_ref().filter(|_| same_kind).map(|f| &f.upper), "upper")?,
        shift: current.as_ref().filter(|_| same_kind).and_then(|f| f.shift.clone()),
        scale: current.as_ref().filter(|_| same_kind).and_then(|f| f.scale.clone()),
        kind,
    });
    Ok(())
}

fn cmd_ktest(mut cfg: FileConfig, a: &KtestArgs, format: Format) -> CliResult<String> {
    let (config, taus) = complete_testing(&mut cfg, &a.testing)?;
    if config.pairing == Pairing::Matched {
        return Err(CliError::Config("ktest requires independent samples".into()));
    }
    let base_src = require(cfg.base.clone(), "base")?;
    let compare = require(cfg.compare.clone(), "compare")?;
    if compare.is_empty() {
        return Err(CliError::Config("at least one [[compare]] entry is required".into()));
    }
    let built: Vec<_> = compare.iter().map(|c| c.family().build()).collect::<CliResult<_>>()?;
    cfg.x = None;
    cfg.y = None;
    cfg.pairs = None;
    cfg.family = None;
    cfg.simulate = None;
    cfg.gen = None;

    let base = sample(read_column(&base_src)?)?;
    let comps: Vec<UnivariateSample> =
        compare.iter().map(|c| sample(read_column(&c.source())?)).collect::<CliResult<_>>()?;
    let mut samples = vec![("n_x".to_string(), base.len())];
    samples.extend(comps.iter().enumerate().map(|(k, s)| (format!("n_{}", k + 1), s.len())));
    let families: Vec<&dyn Transform> = built.iter().map(|(f, _)| f as &dyn Transform).collect();
    let boxes: Vec<ParamBox> = built.iter().map(|(_, b)| b.clone()).collect();
    let names: Vec<String> = families.iter().map(|f| f.name()).collect();
    let set = MultiSampleSet::new(base, comps).map_err(CliError::from_run)?;
    let results = k_sample_test_taus(&set, &families, &boxes, &config, &taus).map_err(CliError::from_run)?;
    let summary = TestSummary {
        command: "ktest",
        title: format!("{}-sample test, families: {}", set.k(), names.join(", ")),
        samples,
    };
    Ok(render_test(format, &cfg, &summary, &results))
}

fn parse_size(s: &str) -> CliResult<[usize; 2]> {
    let parsed = s.split_once('x').and_then(|(a, b)| Some([a.trim().parse().ok()?, b.trim().parse().ok()?]));
    parsed.ok_or_else(|| CliError::Config(format!("sizes are written N1xN2, got `{s}`")))
}

fn cmd_simulate(mut cfg: FileConfig, a: &SimulateArgs, format: Format) -> CliResult<String> {
    if let Some(t) = &a.taus {
        cfg.taus = Some(t.clone());
    }
    if a.alpha.is_some() {
        cfg.alpha = a.alpha;
    }
    if a.m_nodes.is_some() {
        cfg.m_nodes = a.m_nodes;
    }
    set_resolution(&mut cfg, &a.resolution);
    let sim = cfg.simulate.get_or_insert_with(Default::default);
    if a.family.is_some() {
        sim.family = a.family.clone();
    }
    if a.pairing.is_some() {
        sim.pairing = a.pairing.clone();
    }
    if a.dgps.is_some() {
        sim.dgps = a.dgps.clone();
    }
    if let Some(sizes) = &a.sizes {
        sim.sizes = Some(sizes.iter().map(|s| parse_size(s)).collect::<CliResult<_>>()?);
    }
    if a.n_mc.is_some() {
        sim.n_mc = a.n_mc;
    }
    let family: DgpFamily =
        sim.family.get_or_insert_with(|| "continuous".into()).parse().map_err(CliError::config)?;
    let pairing = parse_pairing(sim.pairing.get_or_insert_with(|| "independent".into()))?;
    let dgps = sim.dgps.get_or_insert_with(|| vec![0, 1, 2, 3]).clone();
    let sizes = sim.sizes.get_or_insert_with(|| vec![[500, 500]]).clone();
    let n_mc = *sim.n_mc.get_or_insert(1000);
    let param_box = match (sim.lower.clone(), sim.upper.clone()) {
        (None, None) => None,
        (Some(lo), Some(hi)) => {
            let spec =
                FamilySpec { kind: "location-scale".into(), shift: None, scale: None, lower: lo, upper: hi };
            Some(spec.build()?.1)
        }
        _ => return Err(CliError::Config("simulate needs both lower and upper, or neither".into())),
    };
    let taus = require(cfg.taus.clone(), "taus")?;
    check_taus(&taus)?;
    let nu = cfg.nu.get_or_insert_with(|| NuSpec::Keyword("auto".into())).resolve()?;
    let plan = StudyPlan {
        dgps: sizes
            .iter()
            .flat_map(|&[n1, n2]| dgps.iter().map(move |&dgp_id| DgpSpec { family, dgp_id, pairing, n1, n2 }))
            .collect(),
        taus,
        n_mc,
        alpha: *cfg.alpha.get_or_insert(0.05),
        seed: *cfg.seed.get_or_insert(0),
        m_nodes: *cfg.m_nodes.get_or_insert(512),
        minimize: cfg.minimize.get_or_insert_with(Default::default).complete()?,
        nu,
        param_box,
    };
    let mut plan = plan;
    plan.dgps.sort_by_key(|s| (s.dgp_id, s.n1, s.n2));
    plan.validate().map_err(CliError::config)?;
    cfg.n_boot = None;
    cfg.pairing = None;
    cfg.family = None;
    cfg.x = None;
    cfg.y = None;
    cfg.pairs = None;
    cfg.base = None;
    cfg.compare = None;
    cfg.gen = None;
    let table = warp_speed_study(&plan).map_err(CliError::config)?;
    Ok(render_table(format, &cfg, &table))
}

fn cmd_gen(mut cfg: FileConfig, a: &GenArgs) -> CliResult<String> {
    let g = cfg.gen.get_or_insert_with(Default::default);
    if a.family.is_some() {
        g.family = a.family.clone();
    }
    if a.dgp.is_some() {
        g.dgp = a.dgp;
    }
    if a.pairing.is_some() {
        g.pairing = a.pairing.clone();
    }
    if a.n1.is_some() {
        g.n1 = a.n1;
    }
    if a.n2.is_some() {
        g.n2 = a.n2;
    }
    let family: DgpFamily = g.family.as_deref().unwrap_or("continuous").parse().map_err(CliError::config)?;
    let pairing = parse_pairing(g.pairing.as_deref().unwrap_or("independent"))?;
    let n1 = require(g.n1, "gen.n1")?;
    let spec = DgpSpec { family, dgp_id: g.dgp.unwrap_or(0), pairing, n1, n2: g.n2.unwrap_or(n1) };
    spec.validate().map_err(CliError::config)?;
    let mut rng = RandomStream::new(cfg.seed.unwrap_or(0), GENERATE, 0);
    let data = generate(&spec, &mut rng).map_err(CliError::config)?;
    let mut out = String::from("x,y\n");
    let (x, y): (Vec<f64>, Vec<f64>) = match &data {
        Generated::Independent { x, y } => (x.values().to_vec(), y.values().to_vec()),
        Generated::Matched(p) => p.pairs().iter().copied().unzip(),
    };
    let cell = |v: Option<&f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for i in 0..x.len().max(y.len()) {
        out.push_str(&format!("{},{}\n", cell(x.get(i)), cell(y.get(i))));
    }
    Ok(out)
}
