use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dnagan_core::config::Config;
use dnagan_core::data::pgm::write_pgm;
use dnagan_core::data::{
    load_attr_list, load_image, oracle_attr, read_attr_list, save_dataset, split_train_test, synth_dataset,
    AttrDataset, ATTR_LIST_FILE,
};
use dnagan_core::eval::evaluate_swaps;
use dnagan_core::genome::LatentCode;
use dnagan_core::nets::{ImageBatch, Model};
use dnagan_core::numerics::Checkpoint;
use dnagan_core::sampler::{
    balancedness, criterion_value, expected_iterative_bound, expected_random_pairs, iterative_terms,
    simulate_collection, LabelCensus, Strategy,
};
use dnagan_core::trainer::{checkpoint_annihilates, model_from_checkpoint, Trainer};
use dnagan_core::Error;
use log::info;

use crate::mosaic::tile;
use crate::{AnalyzeArgs, Cli, Command, InterpolateArgs, StrategyArg, StrategyChoice, SimulateArgs, SwapArgs, TrainArgs};

pub enum Failure {
    /// Bad invocation or configuration: exit 2.
    Usage(String),
    /// Anything that went wrong while doing the work: exit 1.
    Runtime(Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Runtime(e) => e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownKey(_) | Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn run(cli: Cli) -> Outcome {
    let mut cfg = Config::load(cli.config.as_deref()).map_err(|e| usage(e.to_string()))?;
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
    }
    let out = cli.out;
    match cli.command {
        Command::Generate => generate(&cfg, out),
        Command::Train(a) => train(cfg, a, out),
        Command::Swap(a) => swap(a, out),
        Command::Interpolate(a) => interpolate(a, out),
        Command::Analyze(a) => analyze(&cfg, a, out),
        Command::Simulate(a) => simulate(&cfg, a, out),
    }
}

fn generate(cfg: &Config, out: Option<PathBuf>) -> Outcome {
    let dir = out.unwrap_or_else(|| PathBuf::from("data"));
    let ds = synth_dataset(&cfg.synth_spec()?)?;
    save_dataset(&ds, &dir)?;
    println!("wrote {} images to {}", ds.len(), dir.display());
    Ok(())
}

fn load_dataset(cfg: &Config) -> Result<(AttrDataset, bool), Failure> {
    match &cfg.data_dir {
        Some(dir) => {
            let list = cfg.attr_file.clone().unwrap_or_else(|| dir.join(ATTR_LIST_FILE));
            let select = (!cfg.attr_select.is_empty()).then_some(cfg.attr_select.as_slice());
            let a = cfg.arch();
            if a.channels != 1 {
                return Err(usage("external datasets are loaded as grayscale"));
            }
            Ok((load_attr_list(dir, &list, select, a.height, a.width)?, false))
        }
        None => Ok((synth_dataset(&cfg.synth_spec()?)?, true)),
    }
}

fn train(mut cfg: Config, args: TrainArgs, out: Option<PathBuf>) -> Outcome {
    if let Some(s) = args.steps {
        cfg.train.steps = s;
    }
    if args.no_annihilate {
        cfg.train.annihilate = false;
    }
    if let Some(s) = args.strategy {
        cfg.train.strategy = match s {
            StrategyArg::Iterative => Strategy::Iterative,
            StrategyArg::Random => Strategy::Random,
        };
    }
    cfg.train.validate()?;
    let dir = out.unwrap_or_else(|| PathBuf::from("run"));
    let (ds, synthetic) = load_dataset(&cfg)?;
    let (train_set, test_set) = split_train_test(&ds, cfg.split_ratio, cfg.train.seed)?;
    info!("training on {} images, {} held out", train_set.len(), test_set.len());
    let mut trainer = match &args.resume {
        Some(path) => Trainer::resume(cfg.train.clone(), train_set, &Checkpoint::load(path)?)?,
        None => Trainer::new(cfg.train.clone(), train_set)?,
    };
    let ckpt = trainer.run(Some(&dir))?.expect("output directory given");
    println!("checkpoint {}", ckpt.display());
    if synthetic && !test_set.is_empty() {
        let evals = evaluate_swaps(trainer.model(), &test_set, 32, cfg.train.seed, cfg.train.annihilate)?;
        let mut csv = String::from("attribute,pairs,swap_success,recon_l1,identity_transfer\n");
        for e in &evals {
            println!(
                "attribute {}: swap success {:.3}, reconstruction L1 {:.4}, identity transfer {:.3}",
                e.attribute + 1,
                e.swap_success,
                e.recon_l1,
                e.identity_transfer
            );
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                e.attribute + 1,
                e.pairs,
                e.swap_success,
                e.recon_l1,
                e.identity_transfer
            );
        }
        let path = dir.join("eval.csv");
        fs::write(&path, csv).map_err(|e| Error::Io { path, source: e })?;
    }
    Ok(())
}

struct Loaded {
    model: Model,
    annihilate: bool,
}

fn load_model(path: &Path) -> Result<Loaded, Failure> {
    let ck = Checkpoint::load(path)?;
    let (model, _) = model_from_checkpoint(&ck)?;
    Ok(Loaded {
        model,
        annihilate: checkpoint_annihilates(&ck),
    })
}

fn attribute_index(one_based: usize, n: usize) -> Result<usize, Failure> {
    if one_based == 0 || one_based > n {
        return Err(Failure::Runtime(Error::Index {
            index: one_based,
            n,
        }));
    }
    Ok(one_based - 1)
}

fn read_pair(model: &Model, a: &Path, b: &Path) -> Result<(Vec<f32>, Vec<f32>), Failure> {
    let arch = model.arch();
    if arch.channels != 1 {
        return Err(usage("only grayscale models can be driven from image files"));
    }
    Ok((load_image(a, arch.height, arch.width)?, load_image(b, arch.height, arch.width)?))
}

fn single(model: &Model, px: &[f32]) -> Result<ImageBatch, Failure> {
    let a = model.arch();
    Ok(ImageBatch::from_images(&[px], a.channels, a.height, a.width)?)
}

fn swap(args: SwapArgs, out: Option<PathBuf>) -> Outcome {
    let Loaded {
        model,
        annihilate,
        ..
    } = load_model(&args.checkpoint)?;
    let attr = attribute_index(args.attribute, model.layout().n())?;
    let (mut a, mut b) = read_pair(&model, &args.image_a, &args.image_b)?;
    if !args.a_dominant {
        let arch = model.arch();
        let oracle_usable = arch.height == arch.width && arch.height % 16 == 0 && attr < 4;
        if !oracle_usable {
            return Err(usage("no oracle for this model; pass --a-dominant to fix the orientation"));
        }
        match (oracle_attr(&a, attr)?, oracle_attr(&b, attr)?) {
            (true, false) => {}
            (false, true) => {
                info!("B carries attribute {}; swapping roles", attr + 1);
                std::mem::swap(&mut a, &mut b);
            }
            _ if args.force => {}
            _ => return Err(Failure::Runtime(Error::NotUseful(attr + 1))),
        }
    }
    let ch = model.forward_children_with(&single(&model, &a)?, &single(&model, &b)?, attr, annihilate)?;
    let strip = [a.as_slice(), &b, ch.a2.image(0), ch.b2.image(0), ch.a1.image(0), ch.b1.image(0)];
    let arch = model.arch();
    let (h, w, px) = tile(&strip, 1, 6, arch.height, arch.width);
    let path = out.unwrap_or_else(|| PathBuf::from("swap.pgm"));
    write_pgm(&path, &px, h, w)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn interpolate(args: InterpolateArgs, out: Option<PathBuf>) -> Outcome {
    if args.grid < 2 {
        return Err(usage("--grid must be at least 2"));
    }
    let Loaded { model, annihilate } = load_model(&args.checkpoint)?;
    let n = model.layout().n();
    let attrs = args
        .attrs
        .iter()
        .map(|&s| attribute_index(s, n))
        .collect::<Result<Vec<_>, _>>()?;
    let (a, b) = read_pair(&model, &args.image_a, &args.image_b)?;
    let codes = model.encode(&ImageBatch::from_images(&[a, b], 1, model.arch().height, model.arch().width)?)?;
    // The far end of each axis is the swap child A2: B's piece, or zeros when B is
    // treated as recessive under annihilation.
    let mut target = codes[1].clone();
    if annihilate {
        for &s in &attrs {
            target = target.annihilate(s)?;
        }
    }
    let codes = interpolation_codes(&codes[0], &target, &attrs, args.grid)?;
    let decoded = model.decode(&codes)?;
    let k = args.grid;
    let rows = if attrs.len() == 2 { k } else { 1 };
    let tiles: Vec<&[f32]> = (0..decoded.batch()).map(|j| decoded.image(j)).collect();
    let arch = model.arch();
    let (h, w, px) = tile(&tiles, rows, k, arch.height, arch.width);
    let path = out.unwrap_or_else(|| PathBuf::from("interpolate.pgm"));
    write_pgm(&path, &px, h, w)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Row-major codes: the row axis sweeps `attrs[0]` when two attributes are given,
/// the column axis sweeps the last attribute.
pub fn interpolation_codes(
    base: &LatentCode,
    target: &LatentCode,
    attrs: &[usize],
    k: usize,
) -> Result<Vec<LatentCode>, Error> {
    let alpha = |t: usize| t as f32 / (k - 1) as f32;
    let sweep = |code: &LatentCode, s: usize, t: usize| code.interpolate_piece(s, target.piece(s)?, alpha(t));
    let mut out = Vec::new();
    match attrs {
        [s] => {
            for c in 0..k {
                out.push(sweep(base, *s, c)?);
            }
        }
        [r_attr, c_attr] => {
            for r in 0..k {
                let row = sweep(base, *r_attr, r)?;
                for c in 0..k {
                    out.push(sweep(&row, *c_attr, c)?);
                }
            }
        }
        _ => return Err(Error::Config("interpolate takes one or two attributes".into())),
    }
    Ok(out)
}

fn fmt_or(v: Result<f64, Error>) -> String {
    match v {
        Ok(x) => format!("{x:.4}"),
        Err(e) => format!("n/a ({e})"),
    }
}

fn analyze(cfg: &Config, args: AnalyzeArgs, out: Option<PathBuf>) -> Outcome {
    let (census, names) = match (&args.attr_file, &args.census) {
        (Some(file), _) => {
            let list = read_attr_list(file, args.select.as_deref())?;
            let labels: Vec<&[bool]> = list.rows.iter().map(|(_, _, l)| l.as_slice()).collect();
            (LabelCensus::from_labels(list.names.len(), &labels)?, list.names)
        }
        (None, Some(counts)) => {
            let c = LabelCensus::from_counts(counts.clone()).map_err(|e| usage(e.to_string()))?;
            let names = (1..=c.n()).map(|s| format!("attr{s}")).collect();
            (c, names)
        }
        (None, None) => {
            let c = cfg.census()?;
            let names = (1..=c.n()).map(|s| format!("attr{s}")).collect();
            (c, names)
        }
    };
    let n = census.n();
    println!("images {}  attributes {n}", census.total());
    let mut csv = String::from("quantity,attribute,value\n");
    let mut values = Vec::new();
    let mut degenerate = false;
    for (s, name) in names.iter().enumerate() {
        let (ones, zeros) = census.sides(s)?;
        match balancedness(&census, s) {
            Ok(rho) if rho > 0.0 => {
                let f = criterion_value(rho);
                values.push(f);
                println!("  {} ({}): with {ones}, without {zeros}, rho {rho:.4}, criterion {f:.4}", s + 1, name);
                let _ = writeln!(csv, "rho,{},{rho}\ncriterion,{},{f}", s + 1, s + 1);
            }
            _ => {
                degenerate = true;
                println!("  {} ({}): with {ones}, without {zeros}, degenerate", s + 1, name);
                let _ = writeln!(csv, "rho,{},degenerate", s + 1);
            }
        }
    }
    if degenerate {
        println!("criterion: n/a (degenerate attribute)");
    } else {
        let value = values.iter().copied().fold(f64::INFINITY, f64::min);
        let holds = n as f64 <= value;
        println!("criterion value {value:.4}; n = {n} {} it", if holds { "satisfies" } else { "violates" });
        let _ = writeln!(csv, "criterion_value,,{value}\nholds,,{holds}");
    }
    let e1 = expected_random_pairs(&census);
    let e2 = expected_iterative_bound(&census);
    println!("E1 (random pairing)        {}", fmt_or(e1.as_ref().map(|v| *v).map_err(clone_err)));
    println!("E2 bound (iterative)       {}", fmt_or(e2.as_ref().map(|v| *v).map_err(clone_err)));
    if let Ok(v) = e1 {
        let _ = writeln!(csv, "e1,,{v}");
    }
    match e2 {
        Ok(v) => {
            let _ = writeln!(csv, "e2_bound,,{v}");
        }
        Err(_) if n > 1 => {
            for (s, t) in iterative_terms(&census).iter().enumerate() {
                let _ = writeln!(csv, "e2_term,{},{t}", s + 1);
            }
        }
        Err(_) => {}
    }
    let path = out.unwrap_or_else(|| PathBuf::from("analysis.csv"));
    fs::write(&path, csv).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn clone_err(e: &Error) -> Error {
    Error::Domain(e.to_string())
}

fn simulate(cfg: &Config, args: SimulateArgs, out: Option<PathBuf>) -> Outcome {
    if args.runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let census = LabelCensus::from_counts(args.census).map_err(|e| usage(e.to_string()))?;
    let seed = cfg.train.seed;
    let strategies: &[Strategy] = match args.strategy {
        StrategyChoice::Random => &[Strategy::Random],
        StrategyChoice::Iterative => &[Strategy::Iterative],
        StrategyChoice::Both => &[Strategy::Random, Strategy::Iterative],
    };
    let mut csv = String::from("strategy,runs,mean,stderr,closed_form\n");
    for &s in strategies {
        let stats = simulate_collection(&census, s, args.runs, seed)?;
        let (name, closed) = match s {
            Strategy::Random => ("random", expected_random_pairs(&census).ok()),
            Strategy::Iterative => ("iterative", expected_iterative_bound(&census).ok()),
        };
        let closed_text = match (s, closed) {
            (Strategy::Random, Some(v)) => format!("  (E1 = {v:.4})"),
            (Strategy::Iterative, Some(v)) => format!("  (E2 bound = {v:.4})"),
            _ => String::new(),
        };
        println!(
            "{name:9} runs {} mean {:.4} ± {:.4}{closed_text}",
            stats.runs, stats.mean, stats.stderr
        );
        let _ = writeln!(
            csv,
            "{name},{},{},{},{}",
            stats.runs,
            stats.mean,
            stats.stderr,
            closed.map(|v| v.to_string()).unwrap_or_default()
        );
    }
    if let Some(path) = out {
        fs::write(&path, csv).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(())
}
