mod diagnose;
mod fit;
mod forecast;
mod mc;
mod simulate;

use crate::cli::Command;
use crate::AppError;

pub fn dispatch(command: Command) -> Result<(), AppError> {
    match command {
        Command::Fit(args) => fit::run(args),
        Command::Forecast(args) => forecast::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Mc(args) => mc::run(args),
        Command::Diagnose(args) => diagnose::run(args),
    }
}
