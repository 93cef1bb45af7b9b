//! Model-backed metrics: LLM judge and critique-guided revision.

use crate::gateway::{GatewayError, ModelClient, ModelRequest};
use crate::instructions::{judge_prompt, revision_prompt};
use crate::reward::p_yes_from_candidates;

fn key(tag: &str, parts: &[&str]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0]);
    }
    format!("{tag}:{}", hex::encode(&h.finalize()[..8]))
}

/// P(Yes) that `candidate` matches `reference`, optionally under a task instruction.
pub fn llm_judge(client: &dyn ModelClient, candidate: &str, reference: &str, instruction: Option<&str>) -> Result<f64, GatewayError> {
    let prompt = judge_prompt(candidate, reference, instruction);
    let req = ModelRequest::score(&prompt, key("judge", &[&prompt]));
    let resp = client.score_first_token(&req)?;
    Ok(p_yes_from_candidates(&resp.first_token_candidates))
}

/// Revises `pre_caption` with `critique`, then scores the revision against `reference`.
pub fn critique_revision_eval(
    client: &dyn ModelClient,
    pre_caption: &str,
    critique: &str,
    reference: &str,
    scorer: impl Fn(&str, &str) -> f64,
) -> Result<f64, GatewayError> {
    let prompt = revision_prompt(pre_caption, critique);
    let req = ModelRequest::generate(&prompt, key("crit-rev", &[&prompt]));
    let revised = client.generate(&req)?.text;
    Ok(scorer(revised.trim(), reference))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{MockConfig, MockModel, TokenLogprob};
    use crate::metrics::bleu4;
    use crate::triplet::NO_EDIT_CRITIQUE;

    #[test]
    fn judge_passthrough() {
        let mock = MockModel::new(MockConfig {
            score_override: Some(vec![TokenLogprob::new("Yes", -0.05), TokenLogprob::new("No", -3.0)]),
            ..MockConfig::new(0)
        });
        assert!(llm_judge(&mock, "a", "b", None).unwrap() > 0.5);
        assert!(llm_judge(&mock, "a", "b", Some("instr")).unwrap() > 0.5);
    }

    #[test]
    fn judge_tracks_overlap() {
        let mock = MockModel::with_seed(0);
        let r = "A man in a black shirt walks slowly toward the camera.";
        let close = llm_judge(&mock, r, r, None).unwrap();
        let far = llm_judge(&mock, "Two birds sit on a wire.", r, None).unwrap();
        assert!(close > 0.9 && far < 0.1);
    }

    #[test]
    fn revision_eval() {
        let mock = MockModel::with_seed(0);
        let pre = "A man wears a white shirt. He has short brown hair.";
        let reference = "A man wears a black shirt. He has short brown hair.";
        let same = critique_revision_eval(&mock, pre, NO_EDIT_CRITIQUE, reference, bleu4).unwrap();
        assert_eq!(same, bleu4(pre, reference));
        let fix = "- Wrong colour. [REPLACE \"white shirt\" -> \"black shirt\"]";
        assert_eq!(critique_revision_eval(&mock, pre, fix, reference, bleu4).unwrap(), 1.0);
        let empty = critique_revision_eval(&mock, pre, "", reference, bleu4).unwrap();
        assert_eq!(empty, bleu4(pre, reference));
    }
}
