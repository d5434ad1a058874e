use anyhow::{bail, Context, Result};
use kginfluence::training::{write_loss_csv, Checkpoint, Trainer};

use crate::common::{load_graphs, load_pairs, make_provider, prepare_for, split, CHECKPOINT_FILE};
use crate::config::RunConfig;

pub const LOSS_FILE: &str = "loss.csv";

pub fn run(cfg: &RunConfig, resume: bool) -> Result<()> {
    let graphs = load_graphs(&cfg.paths.graphs_file)?;
    let pairs = load_pairs(&cfg.paths.pairs_file)?;
    let (train, test) = split(cfg, &pairs)?;
    let provider = make_provider(cfg)?;
    let prepared = prepare_for(&graphs, &[&train, &test], &provider)?;

    let out = &cfg.paths.output_dir;
    cfg.echo_into(out)?;
    let ckpt_path = out.join(CHECKPOINT_FILE);
    let mut trainer = if resume && ckpt_path.exists() {
        let mut ckpt = Checkpoint::load(&ckpt_path)?;
        let same_train = kginfluence::training::TrainConfig {
            epochs: cfg.train.epochs,
            ..ckpt.train
        } == cfg.train;
        if ckpt.encoder != cfg.encoder || !same_train {
            bail!("checkpoint {} was made with a different configuration", ckpt_path.display());
        }
        log::info!("resuming from epoch {}", ckpt.epochs_completed);
        ckpt.train.epochs = cfg.train.epochs;
        Trainer::from_checkpoint(ckpt)?
    } else {
        Trainer::new(cfg.encoder, cfg.train)?
    };
    let remaining = cfg.train.epochs.saturating_sub(trainer.epochs_completed());
    let excluded = trainer.run_epochs(&prepared, &train, &test, remaining, &mut |c| c.save(&ckpt_path))?;
    let loss_path = out.join(LOSS_FILE);
    write_loss_csv(&loss_path, trainer.history()).with_context(|| format!("writing {}", loss_path.display()))?;
    let last = trainer.history().last();
    println!(
        "trained {} epochs on {} pairs ({} excluded); final train loss {}",
        trainer.epochs_completed(),
        train.len(),
        excluded,
        last.map_or("-".into(), |h| format!("{:.6}", h.train_loss))
    );
    Ok(())
}
