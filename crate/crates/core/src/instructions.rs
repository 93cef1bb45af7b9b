//! Task instructions and the fixed prompt layouts built on top of them.

use crate::prompts::templates::fill;
use crate::schema::AspectKind;

macro_rules! resource {
    ($($name:ident => $path:literal,)+) => {
        $(pub const $name: &str = include_str!(concat!("../resources/", $path));)+
    };
}

resource! {
    TASK_SUBJECT => "tasks/subject.txt",
    TASK_SCENE => "tasks/scene.txt",
    TASK_MOTION => "tasks/motion.txt",
    TASK_SPATIAL => "tasks/spatial.txt",
    TASK_CAMERA => "tasks/camera.txt",
    CRITIQUE_GEN => "sft/critique_gen.txt",
    CAPTION_REWARD => "sft/caption_reward.txt",
    CRITIQUE_REWARD => "sft/critique_reward.txt",
    CAPTION_REVISION => "sft/caption_revision.txt",
    CAPTION_REVISION_WITH_CRITIQUE => "sft/caption_revision_with_critique.txt",
    CRITIQUE_BASED_REVISION => "sft/critique_based_revision.txt",
    CAPTION_SCORING => "sft/caption_scoring.txt",
    JUDGE_DIRECT => "eval/judge_direct.txt",
    JUDGE_INSTRUCT => "eval/judge_instruct.txt",
    CRITIQUE_REVISION => "eval/critique_revision.txt",
    GRADING_RUBRIC => "policy/grading_rubric.txt",
    CAPTIONING_POLICY => "policy/captioning_policy.txt",
}

/// Added to a pre-caption prompt when the first draft mentioned frames.
pub const NO_FRAME_INSTRUCTION: &str =
    "Do not mention the word \"frame\" or refer to any specific frame (such as the first, second or last frame).";

pub fn task_instruction(aspect: AspectKind) -> &'static str {
    match aspect {
        AspectKind::Subject => TASK_SUBJECT,
        AspectKind::Scene => TASK_SCENE,
        AspectKind::Motion => TASK_MOTION,
        AspectKind::Spatial => TASK_SPATIAL,
        AspectKind::Camera => TASK_CAMERA,
    }
}

/// Inverse of [`task_instruction`] for prompts that embed one verbatim.
pub fn aspect_of_instruction(text: &str) -> Option<AspectKind> {
    AspectKind::ALL.iter().copied().find(|a| text.contains(task_instruction(*a)))
}

/// Layout shared by every caption-conditioned format:
/// task instruction, caption, optional critique, then the format question.
pub fn caption_prompt(instruction: &str, caption: &str, critique: Option<&str>, question: &str) -> String {
    let mut out = format!("Task Instruction: {instruction}\n\nCaption: {caption}\n\n");
    if let Some(c) = critique {
        out.push_str("Critique: ");
        out.push_str(c);
        out.push_str("\n\n");
    }
    out.push_str(question);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptionPrompt<'a> {
    pub instruction: &'a str,
    pub caption: &'a str,
    pub critique: Option<&'a str>,
    pub question: &'a str,
}

/// Splits a prompt produced by [`caption_prompt`]. Captions and critiques
/// must not contain blank lines, which export guarantees by stripping newlines.
pub fn parse_caption_prompt(prompt: &str) -> Option<CaptionPrompt<'_>> {
    let rest = prompt.strip_prefix("Task Instruction: ")?;
    let (instruction, rest) = rest.split_once("\n\nCaption: ")?;
    let (caption, rest) = rest.split_once("\n\n")?;
    let (critique, question) = match rest.strip_prefix("Critique: ") {
        Some(r) => {
            let (c, q) = r.split_once("\n\n")?;
            (Some(c), q)
        }
        None => (None, rest),
    };
    Some(CaptionPrompt { instruction, caption, critique, question })
}

pub fn judge_prompt(candidate: &str, reference: &str, instruction: Option<&str>) -> String {
    match instruction {
        None => fill(JUDGE_DIRECT, &[("reference", reference), ("candidate", candidate)]),
        Some(i) => fill(JUDGE_INSTRUCT, &[("instruction", i), ("reference", reference), ("candidate", candidate)]),
    }
}

pub fn revision_prompt(pre_caption: &str, critique: &str) -> String {
    fill(CRITIQUE_REVISION, &[("pre_caption", pre_caption), ("critique", critique)])
}

/// Recovers (pre_caption, critique) from a [`revision_prompt`].
pub fn parse_revision_prompt(prompt: &str) -> Option<(&str, &str)> {
    let (head, tail) = CRITIQUE_REVISION.split_once("{pre_caption}")?;
    let (mid, end) = tail.split_once("{critique}")?;
    let rest = prompt.strip_prefix(head)?.strip_suffix(end)?;
    rest.split_once(mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instructions_are_distinct() {
        for a in AspectKind::ALL {
            assert_eq!(aspect_of_instruction(task_instruction(*a)), Some(*a));
        }
        assert!(TASK_SUBJECT.starts_with("Provide a concise yet informative description of the subjects in this video, including their types, appearances"));
    }

    #[test]
    fn caption_prompt_round_trip() {
        let p = caption_prompt(TASK_SCENE, "A street.", Some("- fine"), CAPTION_REWARD);
        let parsed = parse_caption_prompt(&p).unwrap();
        assert_eq!(parsed.caption, "A street.");
        assert_eq!(parsed.critique, Some("- fine"));
        assert_eq!(parsed.question, CAPTION_REWARD);
        let p = caption_prompt(TASK_SCENE, "A street.", None, CAPTION_SCORING);
        assert_eq!(parse_caption_prompt(&p).unwrap().critique, None);
    }

    #[test]
    fn revision_round_trip() {
        let p = revision_prompt("A {critique} cat.", "- make it a dog");
        assert!(p.contains("Original caption: A {critique} cat.\n\nUser feedback: - make it a dog\n\n"));
        assert_eq!(parse_revision_prompt(&p), Some(("A {critique} cat.", "- make it a dog")));
    }

    #[test]
    fn judges() {
        let d = judge_prompt("c", "r", None);
        assert!(d.starts_with("Reference caption: r\n\nCandidate caption: c\n\n"));
        let i = judge_prompt("c", "r", Some("do it"));
        assert!(i.starts_with("Task Instruction: do it\n\n"));
        assert!(i.ends_with("follow the task instruction and match the reference? Answer only Yes or No."));
    }
}
