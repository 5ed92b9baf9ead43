use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use datainit::harness::{self, RunConfig};
use datainit::init::Scheme;
use datainit::Error;

#[derive(Parser)]
#[command(
    name = "datainit",
    version,
    about = "Data-dependent CNN weight initialization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Initialize and train one network.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Override the initializer (xavier, he, pca, datastats).
        #[arg(long)]
        init: Option<Scheme>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Train once per initializer on a shared split and batch order.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated initializers, at least two.
        #[arg(long, value_delimiter = ',', required = true)]
        inits: Vec<Scheme>,
    },
    /// Write an input-gradient heatmap for one validation image.
    Visualize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset_image: usize,
        #[arg(long)]
        out: PathBuf,
        /// Run config; defaults to config.conf next to the model.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write the initial weights of affine layer K (1-based) as CSV.
    DumpInit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        layer: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Train {
            config,
            init,
            seed,
            out_dir,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = init {
                cfg = cfg.with_scheme(s);
            }
            if let Some(s) = seed {
                cfg = cfg.with_seed(s);
            }
            if let Some(d) = out_dir {
                cfg.out_dir = d;
            }
            let out = harness::run_experiment(&cfg)?;
            if let Some(r) = out.metrics.last() {
                println!(
                    "{}: epoch {} train_loss {:.4} val_loss {:.4} val_accuracy {:.4}",
                    cfg.init.scheme, r.epoch, r.train_loss, r.val_loss, r.val_accuracy
                );
            }
            println!("wrote {}", cfg.out_dir.display());
            Ok(())
        }
        Command::Compare { config, inits } => {
            let cfg = RunConfig::load(&config)?;
            let mut first_err = None;
            for (scheme, result) in harness::compare_initializers(&cfg, &inits)? {
                match result {
                    Ok(out) => {
                        if let Some(r) = out.metrics.last() {
                            println!(
                                "{scheme}: val_loss {:.4} val_accuracy {:.4}",
                                r.val_loss, r.val_accuracy
                            );
                        }
                    }
                    Err(e) => {
                        eprintln!("{scheme}: error: {e}");
                        first_err.get_or_insert(e);
                    }
                }
            }
            println!("wrote {}", cfg.out_dir.display());
            first_err.map_or(Ok(()), Err)
        }
        Command::Visualize {
            model,
            dataset_image,
            out,
            config,
        } => {
            let (_, pred) = harness::visualize(&model, config.as_deref(), dataset_image, &out)?;
            println!("predicted class {pred}; wrote {}", out.display());
            Ok(())
        }
        Command::DumpInit { config, layer, out } => {
            let cfg = RunConfig::load(&config)?;
            let bank = harness::dump_init(&cfg, layer, &out)?;
            println!(
                "{} filters of dimension {}; wrote {}",
                bank.count(),
                bank.dim(),
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
