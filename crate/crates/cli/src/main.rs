//! `chopsticks`: command-line front end for the planner.
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "chopsticks", version, about = "Chopstick grip, grasp and trajectory planning")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random stream.
    #[arg(long, global = true, env = "CHOPSTIX_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Preset name or morphology file.
    #[arg(long, global = true, env = "CHOPSTIX_HAND", default_value = "standard")]
    pub hand: String,
    /// Planner tunables (TOML).
    #[arg(long, global = true, env = "CHOPSTIX_CONFIG")]
    pub config: Option<PathBuf>,
    /// Directory for emitted files.
    #[arg(long, global = true, env = "CHOPSTIX_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Gripping styles.
    #[command(subcommand)]
    Styles(StylesCmd),
    /// Gripping poses.
    #[command(subcommand)]
    Grip(GripCmd),
    /// Grasp selection.
    #[command(subcommand)]
    Grasp(GraspCmd),
    /// Plan a scene task end to end and write one trajectory per object.
    Plan(PlanArgs),
    /// Release velocity for a throw.
    ThrowPlan(ThrowArgs),
    /// Tracking score of one trajectory against another.
    Score(ScoreArgs),
    /// Check a scene (and optionally a task) file.
    Validate(ValidateArgs),
}

#[derive(Subcommand, Debug)]
pub enum StylesCmd {
    /// Print every valid style.
    List {
        #[arg(long, default_value_t = 5)]
        fingers: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum GripCmd {
    /// Solve contact IK for one style and contact positions.
    Ik {
        #[arg(long, default_value = "1,1,1,2,0")]
        style: String,
        /// Normalized contact positions along the sticks, one per contacting finger.
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        holding_offset: f64,
        /// Output file name inside the output directory.
        #[arg(long, default_value = "grip.toml")]
        out: String,
    },
    /// Search contact positions with Bayesian optimization.
    Optimize {
        #[arg(long, default_value = "1,1,1,2,0")]
        style: String,
        #[arg(long, default_value = "grip.toml")]
        out: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum GraspCmd {
    /// Rank grasp candidates for one object of a scene file.
    Rank {
        /// Scene file holding the object (and any obstacles).
        #[arg(long)]
        object: PathBuf,
        /// Object id; the first object when omitted.
        #[arg(long)]
        id: Option<String>,
        /// Gripping pose file; the standard style at mid-stick contacts when omitted.
        #[arg(long)]
        grip: Option<PathBuf>,
        /// Current chopstick orientation as w,x,y,z.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        current_config: Option<Vec<f64>>,
    },
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[arg(long, required_unless_present = "demo")]
    pub scene: Option<PathBuf>,
    #[arg(long, required_unless_present = "demo")]
    pub task: Option<PathBuf>,
    /// Generate the random eight-object move task instead of reading files.
    #[arg(long, conflicts_with_all = ["scene", "task"])]
    pub demo: bool,
    /// Gripping pose file.
    #[arg(long, conflicts_with = "style")]
    pub pose: Option<PathBuf>,
    /// Style to optimize a gripping pose for when no pose file is given.
    #[arg(long, default_value = "1,1,1,2,0")]
    pub style: String,
    /// Overrides the task's noise standard deviation (m).
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ThrowArgs {
    /// Landing point x,y,z.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Vec<f64>,
    /// Release point x,y,z; placed on the cuboid boundary when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub release: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// Trajectory to score.
    pub trajectory: PathBuf,
    /// Reference trajectory; the trajectory itself when omitted.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub task: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("CHOPSTIX_LOG", "warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_and_negative_lists() {
        let cli = Cli::try_parse_from(["chopsticks", "throw-plan", "--target", "-0.5,0.1,0", "--seed", "9"]).unwrap();
        assert_eq!(cli.global.seed, 9);
        match cli.command {
            Command::ThrowPlan(t) => assert_eq!(t.target, vec![-0.5, 0.1, 0.0]),
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["chopsticks", "plan"]).is_err());
        assert!(Cli::try_parse_from(["chopsticks", "plan", "--demo", "--scene", "s.toml"]).is_err());
    }
}
