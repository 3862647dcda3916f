//! Version string and the fingerprint of the model specification.

use gridiron_core::constants::all_constants;
use gridiron_core::credit::CreditModel;
use gridiron_core::ep::FEATURE_NAMES;
use gridiron_core::pbp::ScoringEvent;

use crate::io::text_hash;

/// Hash over everything that defines the fitted models: features, events,
/// smooth terms, credit factors and constants.
pub fn model_spec_hash() -> String {
    let mut parts: Vec<String> = Vec::new();
    parts.push(format!("ep:{}", FEATURE_NAMES.join(",")));
    parts.push(format!("events:{}", ScoringEvent::ALL.iter().map(|e| e.label()).collect::<Vec<_>>().join(",")));
    parts.push("wp:s(exp_score_diff),s(seconds_half|half),s(exp_score_time_ratio),half,utm:timeouts|half".into());
    for m in CreditModel::ALL {
        parts.push(format!("{}:{}|{}", m.label(), m.factors().join(","), m.covariates().join(",")));
    }
    for (name, value, _) in all_constants() {
        parts.push(format!("{name}={value}"));
    }
    text_hash(&parts.join("\n"))
}

pub fn version_string() -> String {
    format!("gridiron {} (model spec {})", env!("CARGO_PKG_VERSION"), &model_spec_hash()[..16])
}

pub fn constants_table() -> String {
    let mut out = String::from("name,value,description\n");
    for (name, value, desc) in all_constants() {
        out.push_str(&format!("{name},{value},\"{desc}\"\n"));
    }
    out
}
