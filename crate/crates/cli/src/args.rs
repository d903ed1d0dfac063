use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "geom", version, about = "Numerical semi-Riemannian geometry on a coordinate chart")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print dimension, coordinates, domain, index and parameters.
    Info {
        #[command(flatten)]
        source: SpecSource,
    },
    /// Evaluate a pointwise quantity and print it as JSON.
    Compute {
        what: Quantity,
        #[command(flatten)]
        source: SpecSource,
        /// Base point, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Scalar function for `grad`, in the chart coordinates.
        #[arg(long = "f", allow_hyphen_values = true)]
        function: Option<String>,
    },
    /// Integrate a geodesic and write the trajectory as CSV.
    Geodesic {
        #[command(flatten)]
        source: SpecSource,
        /// Initial point, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Initial velocity components, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        velocity: String,
        /// Start parameter.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        /// End parameter; may be below `t0`.
        #[arg(long, allow_hyphen_values = true)]
        t1: f64,
        /// Maximum RK4 step.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallel transport a vector along a curve and print JSON.
    Transport {
        #[command(flatten)]
        source: SpecSource,
        /// Coordinate expressions in `t`, separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
        /// Vector at the curve point `t0`, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        /// Start parameter.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        /// End parameter; may be below `t0`.
        #[arg(long, allow_hyphen_values = true)]
        t1: f64,
        /// Maximum RK4 step.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the named-check suite; exit status 0 iff every check passes.
    Verify {
        #[command(flatten)]
        source: SpecSource,
        /// Random sample points per check.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Seed for the sample generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overall tolerance; defaults to GEOM_DEFAULT_TOL or 1e-8.
        #[arg(long)]
        tol: Option<f64>,
        /// Maximum RK4 step.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Christoffel,
    Riemann,
    Ricci,
    Scalar,
    Grad,
}

#[derive(Debug, Args)]
pub struct SpecSource {
    /// JSON chart description.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub spec: Option<PathBuf>,
    /// Built-in chart: semi_euclidean, sphere, hyperbolic_halfplane, schwarzschild.
    #[arg(long)]
    pub preset: Option<String>,
    /// Preset parameter as `name=value`; may be repeated.
    #[arg(long = "param", value_name = "K=V", allow_hyphen_values = true)]
    pub params: Vec<String>,
    /// Shorthand for `--param dim=N`.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Shorthand for `--param index=N`.
    #[arg(long)]
    pub index: Option<usize>,
}
