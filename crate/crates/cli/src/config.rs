use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use geomvertex::grading::DegreeWindow;
use geomvertex::models::ModelName;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "geomvertex",
    version,
    about = "Graded vertex algebras and their geometric counterparts"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// trivial, commutative[:d] or free_boson
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Degree window as lo:hi
    #[arg(long, global = true)]
    pub window: Option<String>,
    /// Mode cap K
    #[arg(long, global = true)]
    pub kmax: Option<i32>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest arity of the geometric structure
    #[arg(long = "m-max", global = true)]
    pub m_max: Option<usize>,
    /// JSON run configuration; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Print the JSON report on stdout
    #[arg(long, global = true)]
    pub json: bool,
    /// Record wall-clock timings (makes output run-dependent)
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Run every vertex-algebra and geometric axiom check
    Axioms,
    /// Evaluate μ at insertions given as label@re[,im]
    Eval { insertions: Vec<String> },
    /// Operator product expansion of insertions i → j
    Ope {
        insertions: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        pair: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
    /// Build, extract and rebuild; compare with the original
    Roundtrip,
    /// Residual against truncation: associativity over K, OPE over order
    Converge {
        #[arg(long = "k-values", value_delimiter = ',', default_value = "3,5,7")]
        k_values: Vec<i32>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        orders: Vec<usize>,
    },
    /// Locality orders of basis pairs
    Locality {
        /// Restrict to one pair of labels, as a,b
        #[arg(long)]
        pair: Option<String>,
    },
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub window: Option<WindowSpec>,
    pub kmax: Option<i32>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub m_max: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Deserialize, Debug)]
#[serde(untagged)]
pub enum WindowSpec {
    Pair([i32; 2]),
    Text(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub model: String,
    pub window: [i32; 2],
    pub kmax: i32,
    pub tol: f64,
    pub m_max: usize,
    pub seed: u64,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub json: bool,
    #[serde(skip)]
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: "free_boson".into(),
            window: [0, 6],
            kmax: 7,
            tol: 1e-9,
            m_max: 3,
            seed: 42,
            output: None,
            json: false,
            timing: false,
        }
    }
}

pub fn parse_window(s: &str) -> Result<[i32; 2], String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("window `{s}` is not lo:hi"))?;
    let lo: i32 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad window bound `{lo}`"))?;
    let hi: i32 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad window bound `{hi}`"))?;
    Ok([lo, hi])
}

fn read_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

impl RunConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(args: &CommonArgs) -> Result<Self, String> {
        let mut cfg = Self::default();
        if let Some(path) = &args.config {
            let file = read_file(path)?;
            if let Some(m) = file.model {
                cfg.model = m;
            }
            match file.window {
                Some(WindowSpec::Pair(w)) => cfg.window = w,
                Some(WindowSpec::Text(s)) => cfg.window = parse_window(&s)?,
                None => {}
            }
            cfg.kmax = file.kmax.unwrap_or(cfg.kmax);
            cfg.tol = file.tol.unwrap_or(cfg.tol);
            cfg.seed = file.seed.unwrap_or(cfg.seed);
            cfg.m_max = file.m_max.unwrap_or(cfg.m_max);
            cfg.output = file.output;
        }
        if let Some(m) = &args.model {
            cfg.model = m.clone();
        }
        if let Some(w) = &args.window {
            cfg.window = parse_window(w)?;
        }
        cfg.kmax = args.kmax.unwrap_or(cfg.kmax);
        cfg.tol = args.tol.unwrap_or(cfg.tol);
        cfg.seed = args.seed.unwrap_or(cfg.seed);
        cfg.m_max = args.m_max.unwrap_or(cfg.m_max);
        if args.output.is_some() {
            cfg.output = args.output.clone();
        }
        cfg.json = args.json;
        cfg.timing = args.timing;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.model.parse::<ModelName>().map_err(|e| e.to_string())?;
        self.degree_window()?;
        if self.kmax < 0 {
            return Err(format!("kmax must be non-negative, got {}", self.kmax));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        if self.m_max == 0 {
            return Err("m_max must be at least 1".into());
        }
        Ok(())
    }

    pub fn degree_window(&self) -> Result<DegreeWindow, String> {
        DegreeWindow::new(self.window[0], self.window[1]).map_err(|e| e.to_string())
    }
}
