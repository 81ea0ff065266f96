//! Correlation-driven gate search: locate the quantum falling edge with a
//! handful of probes instead of a full linear scan.
//!
//! The search mirrors the successive-approximation idea: three coarse probes
//! split the range into four parts, a +/-45-gate check guards against a
//! candidate sitting on the falling edge itself, bisection shrinks the
//! bracket, and a final erf fit over the accumulated probe points (topped up
//! with a few extra probes inside the bracket) yields the arrival time.

use thiserror::Error;

use crate::model::{FrameStack, HotPixelMask};
use crate::ranging::{
    fit_erf_edge, fit_erf_edge_fixed_width, stack_metrics, EdgeFit, FitError, ProfileError,
    ProfileOptions, MIN_FIT_SAMPLES,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchPhase {
    Coarse,
    AntiFalse,
    Refine,
    Fit,
}

impl std::fmt::Display for SearchPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SearchPhase::Coarse => write!(f, "coarse"),
            SearchPhase::AntiFalse => write!(f, "anti-false"),
            SearchPhase::Refine => write!(f, "refine"),
            SearchPhase::Fit => write!(f, "fit"),
        }
    }
}

/// One acquired gate position.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub gate_index: usize,
    pub gate_start_ps: i64,
    pub corr_peak: f64,
    pub corr_snr: f64,
    pub phase: SearchPhase,
}

/// Search progress: probe log, current bracket, and phase.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    pub probed: Vec<Probe>,
    /// (lo, hi) gate indices bracketing the edge; hi is the virtual range
    /// end until a low gate has been probed beyond lo.
    pub bracket: (usize, usize),
    pub phase: SearchPhase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub fit: EdgeFit,
    pub state: SearchState,
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("no quantum signal in range after {probes} probes")]
    NoQuantumSignal { probes: usize },
    #[error("scan range of {0} gates is too small for the coarse phase")]
    RangeTooSmall(usize),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("edge fit over probe points failed: {0}")]
    Fit(#[from] FitError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    /// SNR above which a probe counts as seeing the correlation peak.
    pub snr_threshold: f64,
    /// Gates probed before/after the candidate in the anti-false check.
    pub anti_false_offset: usize,
    /// Stop bisecting when the bracket is this many gates or fewer.
    pub bracket_stop: usize,
    /// Extra evenly spaced probes granted to the fit phase.
    pub max_extra_probes: usize,
    pub profile: ProfileOptions,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            snr_threshold: 3.0,
            anti_false_offset: 45,
            // Half the anti-false window: the last bisection steps then land
            // on the falling edge itself and double as fit samples.
            bracket_stop: 45,
            max_extra_probes: 4,
            profile: ProfileOptions::default(),
        }
    }
}

/// Hard cap on acquisitions per search: coarse + checks + bisection steps +
/// fit top-ups never exceed this.
pub const MAX_PROBES: usize = 12;

/// Acquisition-time model: seconds for `n_probes` gate positions at
/// `n_frames` 8-bit frames each, one frame per 1/fps.
pub fn probe_cost_model(n_probes: usize, n_frames: usize, fps: f64, bits: u32) -> f64 {
    n_probes as f64 * n_frames as f64 * (f64::from(bits) / 255.0) / fps
}

struct Prober<'a, F> {
    acquire: F,
    mask: &'a HotPixelMask,
    opts: ProfileOptions,
    n_frames: usize,
    probes: Vec<Probe>,
    gate_width_ps: i64,
    gate_edge_sigma_ps: f64,
}

impl<'a, F> Prober<'a, F>
where
    F: FnMut(usize, usize) -> FrameStack,
{
    fn probe(&mut self, gate_index: usize, phase: SearchPhase) -> Result<usize, ProfileError> {
        if let Some(pos) = self.probes.iter().position(|p| p.gate_index == gate_index) {
            return Ok(pos);
        }
        let stack = (self.acquire)(gate_index, self.n_frames);
        self.gate_width_ps = stack.gate.width_ps;
        self.gate_edge_sigma_ps = stack.gate.edge_sigma_ps;
        let (_, stats) = stack_metrics(&stack, self.mask, &self.opts)?;
        self.probes.push(Probe {
            gate_index,
            gate_start_ps: stack.gate.start_ps,
            corr_peak: stats.peak_value,
            corr_snr: stats.snr,
            phase,
        });
        Ok(self.probes.len() - 1)
    }

    fn step_ps(&self) -> i64 {
        for a in &self.probes {
            for b in &self.probes {
                if b.gate_index > a.gate_index {
                    return ((b.gate_start_ps - a.gate_start_ps)
                        / (b.gate_index - a.gate_index) as i64)
                        .max(1);
                }
            }
        }
        1
    }
}

/// A probe sees the pulse when its SNR clears the detection threshold and
/// its peak still holds above half the reference (plateau) peak; the
/// half-height rule makes bisection converge on the edge midpoint instead of
/// drifting down the tail on bright scenes.
fn is_high(probe: &Probe, threshold: f64, reference_peak: f64) -> bool {
    probe.corr_snr > threshold && probe.corr_peak > 0.5 * reference_peak
}

/// Run the correlation-driven search over `n_gates` schedule positions.
///
/// `acquire(gate_index, n_frames)` returns the stack for one position; the
/// callback may drive the simulator or recorded data. The scan range should
/// exceed one laser period with the gate width above a quarter of the range,
/// so at least one coarse probe lands on the plateau of an in-range return.
pub fn correlation_driven_search<F>(
    acquire: F,
    n_gates: usize,
    n_frames: usize,
    mask: &HotPixelMask,
    params: &SearchParams,
) -> Result<SearchOutcome, SearchError>
where
    F: FnMut(usize, usize) -> FrameStack,
{
    if n_gates < 8 {
        return Err(SearchError::RangeTooSmall(n_gates));
    }
    let mut prober = Prober {
        acquire,
        mask,
        opts: params.profile,
        n_frames,
        probes: Vec::new(),
        gate_width_ps: 0,
        gate_edge_sigma_ps: 0.0,
    };
    let off = params.anti_false_offset;
    let threshold = params.snr_threshold;

    // Phase 1: three coarse probes dividing the range into four equal parts;
    // the candidate is the highest peak clearing the SNR threshold.
    for g in [n_gates / 4, n_gates / 2, 3 * n_gates / 4] {
        prober.probe(g, SearchPhase::Coarse)?;
    }
    let best_clearing = |probes: &[Probe]| {
        probes
            .iter()
            .filter(|p| p.corr_snr > threshold && p.corr_peak > 0.0)
            .max_by(|a, b| a.corr_peak.total_cmp(&b.corr_peak))
            .cloned()
    };
    let candidate = best_clearing(&prober.probes)
        .or_else(|| {
            prober.probes.iter().max_by(|a, b| a.corr_peak.total_cmp(&b.corr_peak)).cloned()
        })
        .expect("coarse probes exist");

    // Phase 2: anti-false-edge check around the candidate. When the coarse
    // phase saw nothing, these checks are the last chance before giving up.
    let c = candidate.gate_index;
    prober.probe(c.saturating_sub(off), SearchPhase::AntiFalse)?;
    prober.probe((c + off).min(n_gates - 1), SearchPhase::AntiFalse)?;
    let reference_peak = match best_clearing(&prober.probes) {
        Some(p) => p.corr_peak,
        None => return Err(SearchError::NoQuantumSignal { probes: prober.probes.len() }),
    };

    // Phase 3: bisect (last high gate, next probed low gate).
    let mut lo = prober
        .probes
        .iter()
        .filter(|p| is_high(p, threshold, reference_peak))
        .map(|p| p.gate_index)
        .max()
        .expect("the reference probe is high");
    let mut hi = prober
        .probes
        .iter()
        .filter(|p| !is_high(p, threshold, reference_peak) && p.gate_index > lo)
        .map(|p| p.gate_index)
        .min()
        .unwrap_or(n_gates);
    while hi - lo > params.bracket_stop && hi - lo >= 2 {
        let mid = lo + (hi - lo) / 2;
        let idx = prober.probe(mid, SearchPhase::Refine)?;
        if is_high(&prober.probes[idx], threshold, reference_peak) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Phase 4: fit over the erf-consistent probes. High probes are plateau
    // samples unless they might sit on the rising shoulder a gate width
    // earlier; low probes right of lo sample the post-fall floor. Top up
    // with extra probes spread inside the bracket.
    let width_gates = (prober.gate_width_ps / prober.step_ps()) as usize;
    let usable = |p: &Probe| {
        if is_high(p, threshold, reference_peak) {
            p.gate_index + width_gates >= hi + off
        } else {
            p.gate_index > lo
        }
    };
    let usable_count = prober.probes.iter().filter(|p| usable(p)).count();
    let extras = MIN_FIT_SAMPLES
        .saturating_sub(usable_count)
        .min(params.max_extra_probes)
        .min(MAX_PROBES.saturating_sub(prober.probes.len()));
    let span = hi.min(n_gates - 1).saturating_sub(lo);
    for k in 1..=extras {
        let g = (lo + k * span / (extras + 1)).min(n_gates - 1);
        prober.probe(g, SearchPhase::Fit)?;
    }

    let mut samples: Vec<(f64, f64)> = prober
        .probes
        .iter()
        .filter(|p| usable(p))
        .map(|p| (p.gate_start_ps as f64, p.corr_peak))
        .collect();
    if samples.len() < MIN_FIT_SAMPLES {
        // Degenerate geometry: admit every high probe as a plateau sample.
        samples = prober
            .probes
            .iter()
            .filter(|p| usable(p) || is_high(p, threshold, reference_peak))
            .map(|p| (p.gate_start_ps as f64, p.corr_peak))
            .collect();
    }

    // Probe points are too sparse to constrain the edge width; when the
    // acquired gates carry a calibrated edge softness, pin it.
    let fit = if prober.gate_edge_sigma_ps > 0.0 {
        fit_erf_edge_fixed_width(&samples, prober.gate_edge_sigma_ps)?
    } else {
        fit_erf_edge(&samples)?
    };
    Ok(SearchOutcome {
        fit,
        state: SearchState { probed: prober.probes, bracket: (lo, hi), phase: SearchPhase::Fit },
    })
}
