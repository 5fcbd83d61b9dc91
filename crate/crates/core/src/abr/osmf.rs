use super::{estimate_segment_throughput, Adapter, AdapterDecision, AdapterInputs};

/// Picks the highest rate below the smaller of the last two segment throughputs.
#[derive(Debug, Clone, Copy, Default)]
pub struct Osmf;

impl Adapter for Osmf {
    fn name(&self) -> &'static str {
        "osmf"
    }

    fn decide(&mut self, inputs: &AdapterInputs<'_>) -> AdapterDecision {
        osmf_decide(inputs)
    }
}

pub fn osmf_decide(inputs: &AdapterInputs<'_>) -> AdapterDecision {
    let estimate = inputs
        .history
        .iter()
        .rev()
        .take(2)
        .filter_map(|s| estimate_segment_throughput(&s.record, inputs.manifest).ok())
        .reduce(f64::min);
    match estimate {
        Some(e) => inputs.decision(inputs.manifest.quantize_to_ladder(e)),
        None => inputs.decision(0),
    }
}
