use marma::simulation::simulate;

use crate::cli::SimulateArgs;
use crate::config::{load_json, ScenarioConfig};
use crate::dataset::write_dataset;
use crate::AppError;

pub fn run(args: SimulateArgs) -> Result<(), AppError> {
    let (config, _bytes) = load_json::<ScenarioConfig>(&args.config)?;
    let mut scenario = config.to_scenario()?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let sim = simulate(&scenario).map_err(AppError::from)?;

    let names: Vec<String> = (1..=scenario.spec.r).map(|l| format!("x{l}")).collect();
    write_dataset(&args.out, &sim.data, &names)?;
    println!(
        "wrote {} ({} rows, {} covariates, seed {})",
        args.out.display(),
        sim.data.n(),
        scenario.spec.r,
        scenario.seed
    );
    Ok(())
}
