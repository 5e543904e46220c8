use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rydgate::atomic_structure::{
    dipole_dipole_energy, dipole_force, InteractionGeometry, Length, PhysicalContext, StarkState,
};
use rydgate::scenario::{self, ExitClass, RunManifest, RunMode, ScenarioError, OUT_DIR_ENV};

#[derive(Parser)]
#[command(
    name = "rydgate",
    version,
    about = "Rydberg dipole-dipole phase gate simulator"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the interaction energy u and force F for a pair of Stark states.
    Interaction(InteractionArgs),
    /// Gate runs and calibration.
    #[command(subcommand)]
    Gate(GateCommand),
    /// Run a scenario and add the joint motional simulations to the budget.
    Motional(RunArgs),
    /// Evaluate a scenario for a list of values of one knob.
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum GateCommand {
    /// Run the scenario's protocol.
    Run(RunArgs),
    /// Calibrate the protocol knob to the target phase (default pi).
    Calibrate(RunArgs),
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(short, long, env = OUT_DIR_ENV, default_value = "rydgate_out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args)]
struct SweepArgs {
    scenario: PathBuf,
    /// Scenario key to vary, e.g. `u_mhz` or `controls.omega_mhz`.
    #[arg(long)]
    knob: String,
    /// Comma-separated values in the scenario file's units.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    values: Vec<f64>,
    #[command(flatten)]
    out: OutDir,
}

#[derive(Args)]
struct InteractionArgs {
    /// First atom as n,q,m.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    state1: [i64; 3],
    /// Second atom as n,q,m (defaults to the first, including its defect).
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
    state2: Option<[i64; 3]>,
    #[arg(long, default_value_t = 0.0)]
    defect1: f64,
    #[arg(long, default_value_t = 0.0)]
    defect2: f64,
    /// Separation in Bohr radii.
    #[arg(
        long,
        conflicts_with = "separation_um",
        required_unless_present = "separation_um"
    )]
    separation_a0: Option<f64>,
    /// Separation in micrometers.
    #[arg(long)]
    separation_um: Option<f64>,
}

fn parse_triple(s: &str) -> Result<[i64; 3], String> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected n,q,m, got {s:?}"))
}

fn stark(qn: &[i64], defect: f64) -> rydgate::Result<StarkState> {
    let n = u32::try_from(qn[0])
        .map_err(|_| rydgate::Error::Domain(format!("n must be >= 1, got {}", qn[0])))?;
    let q = i32::try_from(qn[1]).map_err(|_| rydgate::Error::Domain("q out of range".into()))?;
    let m = i32::try_from(qn[2]).map_err(|_| rydgate::Error::Domain("m out of range".into()))?;
    StarkState::new(n, q, m, defect)
}

fn interaction(args: &InteractionArgs) -> Result<(), ScenarioError> {
    let s1 = stark(&args.state1, args.defect1)?;
    let s2 = match &args.state2 {
        Some(q) => stark(q, args.defect2)?,
        None => s1,
    };
    let ctx = PhysicalContext::new(0.0)?;
    let sep = match (args.separation_a0, args.separation_um) {
        (Some(a0), _) => Length::BohrRadii(a0),
        (None, Some(um)) => Length::Meters(um * 1e-6),
        (None, None) => unreachable!("clap requires a separation"),
    };
    let geom = InteractionGeometry::new(sep, Length::Meters(0.0), ctx.constants())?;
    let u = dipole_dipole_energy(&s1, &s2, &geom, &ctx);
    let f = dipole_force(u, geom.separation())?;
    println!("separation_m = {:.12e}", geom.separation());
    println!("u_rad_per_s = {u:.12e}");
    println!(
        "u_mhz_cyclic = {:.12e}",
        u / (2.0 * std::f64::consts::PI * 1e6)
    );
    println!("force_rad_per_s_per_m = {f:.12e}");
    Ok(())
}

fn print_manifest(m: &RunManifest, dir: &std::path::Path) {
    for (k, v) in &m.parameters {
        println!("{k} = {v}");
    }
    for f in &m.files {
        println!("wrote {}", dir.join(f).display());
    }
}

fn execute(cli: Cli) -> Result<(), ScenarioError> {
    match cli.command {
        Command::Interaction(args) => interaction(&args),
        Command::Gate(GateCommand::Run(a)) => run(&a, RunMode::Run),
        Command::Gate(GateCommand::Calibrate(a)) => run(&a, RunMode::Calibrate),
        Command::Motional(a) => run(&a, RunMode::Motional),
        Command::Sweep(a) => {
            let s = scenario::parse_scenario(&a.scenario)?;
            let (rows, manifest) = scenario::sweep(&s, &a.knob, &a.values, &a.out.out)?;
            let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
            print_manifest(&manifest, &a.out.out);
            if failed > 0 {
                eprintln!(
                    "{failed} of {} sweep rows FAILED; see {}",
                    rows.len(),
                    scenario::SWEEP_FILE
                );
            }
            Ok(())
        }
    }
}

fn run(a: &RunArgs, mode: RunMode) -> Result<(), ScenarioError> {
    let s = scenario::parse_scenario(&a.scenario)?;
    let manifest = scenario::run(&s, &a.out.out, mode)?;
    print_manifest(&manifest, &a.out.out);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.class() {
                ExitClass::Io => 3,
                ExitClass::Config => 4,
                ExitClass::Numeric => 5,
            };
            ExitCode::from(code)
        }
    }
}
