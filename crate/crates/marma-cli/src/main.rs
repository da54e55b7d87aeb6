mod cli;
mod commands;
mod config;
mod dataset;
mod model_file;
mod report;

use clap::Parser;

/// Process exit codes: 0 success, 2 validation, 3 non-convergence, 4 I/O.
#[derive(Debug)]
pub enum AppError {
    Validation(String),
    NonConvergence(String),
    Io(String),
}

impl AppError {
    fn code(&self) -> i32 {
        match self {
            AppError::Validation(_) => 2,
            AppError::NonConvergence(_) => 3,
            AppError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Validation(m) | AppError::NonConvergence(m) | AppError::Io(m) => m,
        }
    }
}

impl From<marma::Error> for AppError {
    fn from(e: marma::Error) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

fn main() {
    let args = cli::Cli::parse();
    let threads = args.threads.or_else(|| {
        std::env::var("MARMA_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
    });
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: could not configure thread pool: {e}");
            std::process::exit(2);
        }
    }
    match commands::dispatch(args.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.code());
        }
    }
}
