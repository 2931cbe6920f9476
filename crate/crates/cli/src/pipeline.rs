//! Simulation and reconstruction of a whole experiment.

use pentomo_core::fock::tail_cutoff;
use pentomo_core::measurement::{analytic_outcomes, sample_events, sample_pulse, Drive, RngSpec};
use pentomo_core::state::{apply_spin_rotation, Spin};
use pentomo_core::tomography::{self, ReconstructionReport};
use rayon::prelude::*;

use crate::config::TomographyConfig;
use crate::records::{Histogram, PhaseRecord, PulseRun, RecordSet, SpinTally};
use crate::Result;

/// Runs every drive phase and every spin pulse of `config`.
///
/// Phases run in parallel; each draws from its own stream of `rng`, so the
/// result does not depend on scheduling.
pub fn simulate(config: &TomographyConfig, rng: RngSpec) -> Result<RecordSet> {
    config.validate()?;
    let config = config.resolved();
    let state = config.true_state()?;
    let k = config.phases();
    let phases = (0..k)
        .into_par_iter()
        .map(|j| -> Result<PhaseRecord> {
            let drive = Drive::on_grid(config.alpha_mod, j, k);
            let histogram = if config.exact_mode {
                let n_max = tail_cutoff(state.cutoff(), config.alpha_mod);
                let d = analytic_outcomes(&state, drive, config.eta, n_max)?;
                let joint =
                    |spin: Spin| d.branch(spin).iter().map(|p| d.weight(spin) * p).collect();
                Histogram::Weights {
                    up: joint(Spin::Up),
                    down: joint(Spin::Down),
                }
            } else {
                let r = sample_events(&state, drive, config.eta, config.events_per_phase, &rng, j)?;
                Histogram::Counts {
                    up: r.counts_up,
                    down: r.counts_down,
                }
            };
            Ok(PhaseRecord {
                phase_index: j,
                drive,
                eta: config.eta,
                histogram,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pulses = config
        .spin_pulses
        .iter()
        .enumerate()
        .map(|(i, p)| -> Result<PulseRun> {
            let rotation = p.rotation();
            let tally = if config.exact_mode {
                let rotated = apply_spin_rotation(&state, rotation)?;
                SpinTally::Weights {
                    up: rotated.branch_weight(Spin::Up),
                    down: rotated.branch_weight(Spin::Down),
                }
            } else {
                let r = sample_pulse(&state, rotation, config.pulse_events(), &rng, i)?;
                SpinTally::Counts {
                    up: r.up,
                    down: r.down,
                }
            };
            Ok(PulseRun {
                pulse_index: i,
                rotation,
                tally,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RecordSet {
        config,
        rng,
        phases,
        pulses,
    })
}

/// Reconstructs the blocks, amplitudes and spin parameters from a record set.
pub fn reconstruct(records: &RecordSet) -> Result<ReconstructionReport> {
    let dists = records.distributions()?;
    let pulses = records.observations()?;
    Ok(tomography::reconstruct(
        &dists,
        &pulses,
        &records.config.reconstruction_params(),
    )?)
}
