//! Joint spin / excitation-number statistics after a displacement drive.
//!
//! Each event projects onto `|spin>|n>`: the spin branch is drawn with weight
//! `c_i^2`, then `n` from the displaced distribution of that branch, then the
//! detector keeps each quantum with probability `eta`.

use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;

use crate::fock::{displacement_matrix, ln_factorial, tail_cutoff};
use crate::state::{
    apply_spin_rotation, projected_density, CyclotronDensityMatrix, EntangledState, Spin,
    SpinRotation,
};
use crate::tomography::PulseObservation;
use crate::{Complex, Error, Result};

/// Reference-field displacement `|alpha| e^{i phase}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    pub alpha_mod: f64,
    pub phase: f64,
}

impl Drive {
    pub fn new(alpha_mod: f64, phase: f64) -> Self {
        Self { alpha_mod, phase }
    }

    pub fn alpha(&self) -> Complex {
        Complex::from_polar(self.alpha_mod, self.phase)
    }

    /// Drive `j` of a uniform `k`-point phase grid on `[0, 2 pi)`.
    pub fn on_grid(alpha_mod: f64, j: usize, k: usize) -> Self {
        Self::new(alpha_mod, core::f64::consts::TAU * j as f64 / k as f64)
    }
}

/// `P(n) = <n|D^dag(alpha) rho D(alpha)|n>` for `n <= n_max`.
///
/// Built from products of displacement elements,
/// `sum_{k,m} conj(<k|D|n>) rho_{k,m} <m|D|n>`.
pub fn displaced_distribution(
    rho: &CyclotronDensityMatrix,
    alpha: Complex,
    n_max: usize,
) -> Result<Vec<f64>> {
    let dev = rho.hermitian_deviation();
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    if n_max < rho.cutoff() {
        return Err(Error::RangeBelowCutoff {
            n: n_max,
            cutoff: rho.cutoff(),
        });
    }
    let d = displacement_matrix(rho.cutoff(), n_max, alpha);
    let rd = rho.entries() * &d;
    Ok((0..=n_max)
        .map(|n| {
            (0..=rho.cutoff())
                .map(|k| (d[(k, n)].conj() * rd[(k, n)]).re)
                .sum()
        })
        .collect())
}

/// `B_{k,n}(eta) = C(n, k) eta^k (1 - eta)^(n - k)`.
pub fn binomial_weight(n: usize, k: usize, eta: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if eta == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln_c = ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    let ln_p = if k == 0 {
        0.0
    } else {
        k as f64 * libm::log(eta)
    };
    libm::exp(ln_c + ln_p + (n - k) as f64 * libm::log1p(-eta))
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::EfficiencyOutOfRange(eta))
    }
}

/// Binomial loss model: `P_eta(k) = sum_{n >= k} B_{k,n}(eta) p(n)`, with the
/// sum truncated at the length of `p`.
pub fn efficiency_convolve(p: &[f64], eta: f64) -> Result<Vec<f64>> {
    check_eta(eta)?;
    if eta == 1.0 {
        return Ok(p.to_vec());
    }
    Ok((0..p.len())
        .map(|k| {
            (k..p.len())
                .map(|n| binomial_weight(n, k, eta) * p[n])
                .sum()
        })
        .collect())
}

/// Branch weights and per-branch conditional distributions of the detected
/// count `k` at one drive phase.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub drive: Drive,
    pub eta: f64,
    pub w_up: f64,
    pub w_down: f64,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn branch(&self, spin: Spin) -> &[f64] {
        match spin {
            Spin::Up => &self.up,
            Spin::Down => &self.down,
        }
    }

    pub fn weight(&self, spin: Spin) -> f64 {
        match spin {
            Spin::Up => self.w_up,
            Spin::Down => self.w_down,
        }
    }

    /// `w_up sum p_up + w_down sum p_down`.
    pub fn total_mass(&self) -> f64 {
        self.w_up * self.up.iter().sum::<f64>() + self.w_down * self.down.iter().sum::<f64>()
    }
}

/// Exact (infinite-statistics) measured distribution for `k <= n_max`.
pub fn analytic_outcomes(
    state: &EntangledState,
    drive: Drive,
    eta: f64,
    n_max: usize,
) -> Result<OutcomeDistribution> {
    check_eta(eta)?;
    let branch = |spin: Spin| -> Result<Vec<f64>> {
        if state.branch_weight(spin) == 0.0 {
            return Ok(alloc::vec![0.0; n_max + 1]);
        }
        let rho = projected_density(state, spin)?;
        efficiency_convolve(&displaced_distribution(&rho, drive.alpha(), n_max)?, eta)
    };
    Ok(OutcomeDistribution {
        drive,
        eta,
        w_up: state.branch_weight(Spin::Up),
        w_down: state.branch_weight(Spin::Down),
        up: branch(Spin::Up)?,
        down: branch(Spin::Down)?,
    })
}

/// Histogram of simulated events at one drive phase.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub phase_index: usize,
    pub drive: Drive,
    pub eta: f64,
    pub counts_up: Vec<u64>,
    pub counts_down: Vec<u64>,
    pub total_events: u64,
}

impl MeasurementRecord {
    /// Fails unless both histograms have the same, nonzero length.
    pub fn new(
        phase_index: usize,
        drive: Drive,
        eta: f64,
        counts_up: Vec<u64>,
        counts_down: Vec<u64>,
    ) -> Result<Self> {
        check_eta(eta)?;
        if counts_up.len() != counts_down.len() || counts_up.is_empty() {
            return Err(Error::InconsistentPhases);
        }
        let total_events = counts_up.iter().chain(&counts_down).sum();
        Ok(Self {
            phase_index,
            drive,
            eta,
            counts_up,
            counts_down,
            total_events,
        })
    }

    pub fn counts(&self, spin: Spin) -> &[u64] {
        match spin {
            Spin::Up => &self.counts_up,
            Spin::Down => &self.counts_down,
        }
    }

    pub fn spin_total(&self, spin: Spin) -> u64 {
        self.counts(spin).iter().sum()
    }

    /// Highest recorded count value.
    pub fn n_max(&self) -> usize {
        self.counts_up.len() - 1
    }
}

/// Which experiment a random stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Tomography = 0,
    Pulse = 1,
}

/// Seed plus replicate index; every (channel, index) pair gets its own
/// ChaCha8 stream, so parallel and serial schedules draw identical numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    pub replicate: u32,
}

impl RngSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed, replicate: 0 }
    }

    pub fn with_replicate(self, replicate: u32) -> Self {
        Self { replicate, ..self }
    }

    pub fn stream(&self, channel: Channel, index: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((channel as u64) << 62) | ((self.replicate as u64) << 32) | index as u64);
        rng
    }
}

/// Per-phase event generator: spin, then excitation number, then thinning.
#[derive(Debug, Clone)]
pub struct EventSampler {
    spin: Bernoulli,
    up: Option<WeightedIndex<f64>>,
    down: Option<WeightedIndex<f64>>,
    thinning: Vec<Binomial>,
    n_max: usize,
}

impl EventSampler {
    /// Excitation numbers are drawn on `0..=n_max`, with
    /// `n_max = tail_cutoff(state.cutoff(), |alpha|)`.
    pub fn new(state: &EntangledState, drive: Drive, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        let n_max = tail_cutoff(state.cutoff(), drive.alpha_mod);
        let branch = |spin: Spin| -> Result<Option<WeightedIndex<f64>>> {
            if state.branch_weight(spin) == 0.0 {
                return Ok(None);
            }
            let rho = projected_density(state, spin)?;
            let p = displaced_distribution(&rho, drive.alpha(), n_max)?;
            let index = WeightedIndex::new(p.iter().map(|&x| x.max(0.0)))
                .map_err(|_| Error::NonFinite("displaced distribution"))?;
            Ok(Some(index))
        };
        let spin = Bernoulli::new(state.branch_weight(Spin::Up).clamp(0.0, 1.0))
            .map_err(|_| Error::NonFinite("spin weight"))?;
        let thinning = (0..=n_max)
            .map(|n| Binomial::new(n as u64, eta).map_err(|_| Error::EfficiencyOutOfRange(eta)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spin,
            up: branch(Spin::Up)?,
            down: branch(Spin::Down)?,
            thinning,
            n_max,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Accumulates `events` draws into `(counts_up, counts_down)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, events: u64) -> (Vec<u64>, Vec<u64>) {
        let mut up = alloc::vec![0u64; self.n_max + 1];
        let mut down = alloc::vec![0u64; self.n_max + 1];
        for _ in 0..events {
            let is_up = self.spin.sample(rng);
            let (index, counts) = if is_up {
                (&self.up, &mut up)
            } else {
                (&self.down, &mut down)
            };
            let n = index
                .as_ref()
                .expect("branch with nonzero weight")
                .sample(rng);
            let k = self.thinning[n].sample(rng) as usize;
            counts[k] += 1;
        }
        (up, down)
    }
}

/// Simulates `events` joint measurements at drive `phase_index` using the
/// stream `(Tomography, phase_index)` of `rng`.
pub fn sample_events(
    state: &EntangledState,
    drive: Drive,
    eta: f64,
    events: u64,
    rng: &RngSpec,
    phase_index: usize,
) -> Result<MeasurementRecord> {
    if events == 0 {
        return Err(Error::NoEvents);
    }
    let sampler = EventSampler::new(state, drive, eta)?;
    let mut stream = rng.stream(Channel::Tomography, phase_index as u32);
    let (up, down) = sampler.sample(&mut stream, events);
    MeasurementRecord::new(phase_index, drive, eta, up, down)
}

/// Branch weights and conditional frequencies of a record.
///
/// A branch with no events gets an all-zero distribution.
pub fn empirical_distributions(record: &MeasurementRecord) -> Result<OutcomeDistribution> {
    if record.total_events == 0 {
        return Err(Error::EmptyRecord);
    }
    let total = record.total_events as f64;
    let freq = |spin: Spin| -> Vec<f64> {
        let n = record.spin_total(spin);
        let denom = if n == 0 { 1.0 } else { n as f64 };
        record
            .counts(spin)
            .iter()
            .map(|&c| c as f64 / denom)
            .collect()
    };
    Ok(OutcomeDistribution {
        drive: record.drive,
        eta: record.eta,
        w_up: record.spin_total(Spin::Up) as f64 / total,
        w_down: record.spin_total(Spin::Down) as f64 / total,
        up: freq(Spin::Up),
        down: freq(Spin::Down),
    })
}

/// Spin counts of one pulse run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseRecord {
    pub pulse_index: usize,
    pub rotation: SpinRotation,
    pub up: u64,
    pub down: u64,
}

impl PulseRecord {
    pub fn observation(&self) -> Result<PulseObservation> {
        let total = self.up + self.down;
        if total == 0 {
            return Err(Error::EmptyRecord);
        }
        Ok(PulseObservation {
            rotation: self.rotation,
            pbar_up: self.up as f64 / total as f64,
        })
    }
}

/// Applies `rotation` and counts spin-up outcomes of `events` runs, drawn from
/// the stream `(Pulse, pulse_index)`. Only the spin is read out, so the
/// per-event Bernoulli trials are drawn as one binomial.
pub fn sample_pulse(
    state: &EntangledState,
    rotation: SpinRotation,
    events: u64,
    rng: &RngSpec,
    pulse_index: usize,
) -> Result<PulseRecord> {
    if events == 0 {
        return Err(Error::NoEvents);
    }
    let rotated = apply_spin_rotation(state, rotation)?;
    let p_up = rotated.branch_weight(Spin::Up).clamp(0.0, 1.0);
    let binomial =
        Binomial::new(events, p_up).map_err(|_| Error::NonFinite("pulse probability"))?;
    let up = binomial.sample(&mut rng.stream(Channel::Pulse, pulse_index as u32));
    Ok(PulseRecord {
        pulse_index,
        rotation,
        up,
        down: events - up,
    })
}
