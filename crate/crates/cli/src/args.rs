use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "kmsgraph",
    version,
    about = "Green functions, harmonic vectors, Martin kernels and end spaces of weighted digraphs"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Graph document to load.
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "family")]
    pub graph: Option<PathBuf>,
    /// Built-in family name.
    #[arg(long, global = true, value_name = "NAME")]
    pub family: Option<String>,
    /// Family parameters as a JSON object.
    #[arg(long, global = true, value_name = "JSON")]
    pub params: Option<String>,
    /// Inverse temperature.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Truncation depth for leveled graphs and families.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Convergence tolerance for series.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest matrix power summed by a series.
    #[arg(long = "max-power", global = true)]
    pub max_power: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Exit with status 3 when a verdict is undetermined.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Seed for randomized property checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Harmonic,
    Almost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReturnModeArg {
    RecurrentExact,
    RecurrentWithLoop,
    TransientVariant,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Validate a graph document or family and summarize it.
    Parse {
        /// Print the normalized graph document of the truncation.
        #[arg(long)]
        emit: bool,
        /// Print the weight matrix A(β) (needs --beta).
        #[arg(long)]
        matrix: bool,
    },
    /// Green function G(v,w) = Σ A(β)ⁿ_{v,w}.
    Green {
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
    },
    /// Gurevich entropy of the component of a vertex.
    Entropy {
        #[arg(long)]
        vertex: Option<String>,
    },
    /// First-return series at a vertex.
    FirstReturn {
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Recurrence or transience at a vertex.
    Classify {
        #[arg(long)]
        vertex: Option<String>,
    },
    /// Shape of the set of inverse temperatures admitting KMS weights.
    BetaSet,
    /// Residuals of a vector against A(β)ψ = ψ.
    HarmonicVerify {
        /// Vertex values as a JSON object or a path to one.
        #[arg(long)]
        vector: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Harmonic)]
        mode: ModeArg,
    },
    /// Level matrices of an exhaustion and the extreme compatible chains.
    DeltaSolve {
        #[arg(long)]
        base: Option<String>,
        /// Level horizon of the chain solver.
        #[arg(long)]
        horizon: Option<usize>,
        /// Number of exhaustion levels to build.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long = "escape-horizon", default_value_t = 3)]
        escape_horizon: usize,
        /// Comma-separated vertices allowed to carry mass.
        #[arg(long)]
        face: Option<String>,
        /// Also print the harmonic vector of each distinct chain.
        #[arg(long)]
        vectors: bool,
    },
    /// Martin kernel K_β(v,w) = G(v,w)/G(v₀,w).
    Martin {
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: String,
        /// Print the whole column K_β(·,w).
        #[arg(long)]
        column: bool,
    },
    /// The weight 𝕎 of a ray prefix.
    RayWeight {
        #[arg(long)]
        ray: String,
        /// Number of prefix vertices.
        #[arg(long, default_value_t = 8)]
        length: usize,
    },
    /// Whether a ray is β-summable.
    Summability {
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        ray: String,
        #[arg(long = "ray-len")]
        ray_len: Option<usize>,
    },
    /// The extremal conformal measure carried by a summable ray.
    ExtremalRay {
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        ray: String,
        #[arg(long = "ray-len")]
        ray_len: Option<usize>,
    },
    /// Compare Martin kernels along a ray with a conformal measure.
    BoundaryTest {
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        ray: String,
        /// The harmonic vector of the measure, as JSON or a path.
        #[arg(long)]
        vector: String,
        /// Comma-separated sample vertices; defaults to valued interior vertices within distance 2 of the base.
        #[arg(long)]
        sample: Option<String>,
        /// Comma-separated ray positions k.
        #[arg(long, default_value = "10,20,40")]
        schedule: String,
        #[arg(long, default_value_t = 1e-3)]
        threshold: f64,
    },
    /// End fingerprints [D_n]_p of rays.
    Ends {
        #[arg(long)]
        base: Option<String>,
        /// Ray specification; may be repeated.
        #[arg(long, required = true)]
        ray: Vec<String>,
        /// Number of exhaustion levels in each fingerprint.
        #[arg(long, default_value_t = 4)]
        resolution: usize,
        /// Shift applied to every ray.
        #[arg(long, default_value_t = 0)]
        shift: usize,
        /// Also decide reachability `FROM,TO` avoiding --avoid.
        #[arg(long)]
        reach: Option<String>,
        #[arg(long)]
        avoid: Option<String>,
    },
    /// Ends of a Bratteli diagram as ideal sets.
    BratteliEnds {
        #[arg(long)]
        top: Option<String>,
        #[arg(long, default_value_t = 4)]
        resolution: usize,
        #[arg(long, default_value_t = 2)]
        window: usize,
        #[arg(long, default_value_t = 4)]
        horizon: usize,
        #[arg(long = "width-cap", default_value_t = 12)]
        width_cap: usize,
    },
    /// Minimality of an end, given by a ray or by every Bratteli end.
    MinimalEnd {
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        ray: Option<String>,
        #[arg(long, default_value_t = 4)]
        resolution: usize,
        #[arg(long, default_value_t = 6)]
        horizon: usize,
        #[arg(long, default_value_t = 2)]
        window: usize,
    },
    /// Smallest N such that every arrow is reversed by a path of length ≤ N.
    AlmostUndirected {
        #[arg(long = "n-max", default_value_t = 6)]
        n_max: usize,
    },
    /// The Bratteli diagram Br(Γ) of an exhaustion.
    ToBratteli {
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long = "escape-horizon", default_value_t = 3)]
        escape_horizon: usize,
        #[arg(long)]
        emit: bool,
    },
    /// Γ^{v₀}: delete the arrows into v₀ and prune dead ends.
    SourceTurn {
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        emit: bool,
    },
    /// Move a harmonic vector between Γ and Γ^{v₀}.
    Transfer {
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        vector: String,
        #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
        direction: DirectionArg,
    },
    /// Plan return paths prescribing entropy h at v₀.
    PlanReturns {
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        h: f64,
        #[arg(long, value_enum, default_value_t = ReturnModeArg::RecurrentExact)]
        mode: ReturnModeArg,
    },
    /// Add planned return paths to a graph.
    ApplyReturns {
        #[arg(long)]
        base: Option<String>,
        /// Plan document (JSON or path); planned on the fly from --h otherwise.
        #[arg(long, conflicts_with = "h")]
        plan: Option<String>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, value_enum, default_value_t = ReturnModeArg::RecurrentExact)]
        mode: ReturnModeArg,
        #[arg(long)]
        emit: bool,
    },
    /// Replace vertices by finite strongly connected digraphs.
    Attach {
        /// `VERTEX=SOURCE@ANCHOR`, SOURCE a finite family name or a graph file.
        #[arg(long = "at", required = true)]
        at: Vec<String>,
        #[arg(long)]
        emit: bool,
    },
    /// Glue CAR-type diagrams along a spine; with --beta decide extension feasibility.
    Glue {
        /// Glue specification (JSON or path); defaults to --params.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        emit: bool,
    },
    /// Cylinder measures and KMS state values of a conformal measure.
    Kms {
        /// The harmonic vector of the measure, as JSON or a path.
        #[arg(long)]
        vector: String,
        /// Path μ as comma-separated vertices; repeated values are concatenated.
        #[arg(long, required = true)]
        mu: Vec<String>,
        /// Path ν; defaults to μ.
        #[arg(long)]
        nu: Option<String>,
        /// Also print the Doob transform of A(β).
        #[arg(long)]
        doob: bool,
    },
    /// Run a worked example and compare with its expected values.
    Example {
        /// Preset name; `list` prints the available presets.
        name: String,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
    },
    /// Run the full acceptance suite.
    Selftest {
        /// Run only these criteria (comma-separated numbers).
        #[arg(long)]
        only: Option<String>,
    },
}
