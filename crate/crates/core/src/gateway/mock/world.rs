//! Seeded ground truth for mock videos: each (video, aspect) draws a few
//! facts from a fixed pool and plants wrong spans in the pre-caption.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::seed::seeded_rng;
use crate::schema::AspectKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Fact {
    pub sentence: &'static str,
    pub correct: &'static str,
    pub wrong: &'static str,
}

impl Fact {
    pub fn render(&self, span: &str) -> String {
        self.sentence.replacen("{}", span, 1)
    }
}

const fn f(sentence: &'static str, correct: &'static str, wrong: &'static str) -> Fact {
    Fact { sentence, correct, wrong }
}

const SUBJECT: &[Fact] = &[
    f("A man wears a {}.", "black shirt", "white shirt"),
    f("He has {}.", "short brown hair", "long blond hair"),
    f("A woman beside him carries a {}.", "red umbrella", "blue backpack"),
    f("A small {} sits near their feet.", "gray terrier", "white poodle"),
    f("The man holds a {}.", "paper coffee cup", "mobile phone"),
    f("The woman wears {}.", "round glasses", "a wide-brimmed hat"),
    f("A {} stands behind them.", "young boy in a yellow raincoat", "elderly man in a gray coat"),
];

const SCENE: &[Fact] = &[
    f("The scene is a {}.", "narrow city street", "wide country road"),
    f("It is {}.", "early evening", "midday"),
    f("The pavement is {}.", "wet from rain", "dry and dusty"),
    f("Shop windows glow with {}.", "warm yellow light", "cold blue light"),
    f("A {} is parked along the curb.", "green bicycle", "black sedan"),
    f("A {} appears in the top corner.", "white channel logo", "red timestamp"),
    f("The buildings are made of {}.", "red brick", "gray concrete"),
];

const MOTION: &[Fact] = &[
    f("The man walks {}.", "slowly toward the camera", "quickly away from the camera"),
    f("He {} as he walks.", "sips from his cup", "checks his phone"),
    f("The dog {}.", "trots beside him", "sits still"),
    f("The woman {}.", "opens her umbrella", "closes her umbrella"),
    f("A cyclist {}.", "passes from left to right", "passes from right to left"),
    f("Finally, the man {}.", "stops at the corner", "crosses the street"),
    f("The boy {}.", "waves at the man", "runs ahead"),
];

const SPATIAL: &[Fact] = &[
    f("The video opens with {}.", "a medium shot of the man", "a close-up of the man"),
    f("The man is positioned {}.", "on the left side of the frame", "on the right side of the frame"),
    f("The woman stands {}.", "in the middle ground", "in the foreground"),
    f("The dog stays {}.", "in the lower right corner", "in the upper left corner"),
    f("The shop fronts fill {}.", "the background", "the top edge"),
    f("As he approaches, the shot becomes {}.", "a medium close-up", "a wide shot"),
    f("The man appears {}.", "at the camera's eye level", "below the camera"),
];

const CAMERA: &[Fact] = &[
    f("The video plays {}.", "at regular speed", "in slow motion"),
    f("The camera is positioned {}.", "at eye level", "at a high angle"),
    f("It {}.", "moves backward smoothly", "pans left quickly"),
    f("The focus is {}.", "deep, keeping the whole street sharp", "shallow, blurring the background"),
    f("The lens shows {}.", "no distortion", "fisheye distortion"),
    f("Camera movement is {}.", "very smooth", "shaky and handheld"),
];

pub fn fact_pool(aspect: AspectKind) -> &'static [Fact] {
    match aspect {
        AspectKind::Subject => SUBJECT,
        AspectKind::Scene => SCENE,
        AspectKind::Motion => MOTION,
        AspectKind::Spatial => SPATIAL,
        AspectKind::Camera => CAMERA,
    }
}

/// Aspect whose pool spans occur most often in `caption`.
pub fn aspect_of_caption(caption: &str) -> Option<AspectKind> {
    let mut best = None;
    let mut best_hits = 0;
    for &a in AspectKind::ALL {
        let hits = fact_pool(a)
            .iter()
            .filter(|f| caption.contains(f.correct) || caption.contains(f.wrong))
            .count();
        if hits > best_hits {
            best_hits = hits;
            best = Some(a);
        }
    }
    best
}

/// Facts drawn per caption; the pool's first fact is always included.
pub const FACTS_PER_CAPTION: usize = 4;

/// P(pre-caption score = 5, 4, 3, 2) per aspect, indexed like `AspectKind::ALL`.
pub const PRE_SCORE_DIST: [[f64; 4]; 5] = [
    [0.20, 0.40, 0.30, 0.10],
    [0.20, 0.45, 0.30, 0.05],
    [0.20, 0.45, 0.30, 0.05],
    [0.10, 0.30, 0.40, 0.20],
    [0.50, 0.40, 0.10, 0.00],
];

pub fn draw_pre_score(aspect: AspectKind, rng: &mut ChaCha8Rng) -> u8 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in PRE_SCORE_DIST[aspect as usize].iter().enumerate() {
        acc += p;
        if u < acc {
            return 5 - i as u8;
        }
    }
    2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlantedError {
    pub wrong_span: String,
    pub correct_span: String,
}

/// Ground truth and planted errors for one video and aspect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MockScenario {
    pub seed: u64,
    pub media_uri: String,
    pub aspect: AspectKind,
    pub facts: Vec<Fact>,
    /// Indexes into `facts` that the pre-caption gets wrong.
    pub error_facts: Vec<usize>,
    pub planted_errors: Vec<PlantedError>,
    pub pre_score: u8,
    /// Probability that the first revision leaves one error behind.
    pub convergence_residual: f64,
    pub frame_mention: bool,
}

impl MockScenario {
    pub fn derive(seed: u64, media_uri: &str, aspect: AspectKind, residual: f64, frame_rate: f64) -> Self {
        let mut rng = seeded_rng(seed, &["world", media_uri, aspect.as_str()]);
        let pool = fact_pool(aspect);
        let mut picked: Vec<usize> = sample(&mut rng, pool.len() - 1, FACTS_PER_CAPTION - 1)
            .into_iter()
            .map(|i| i + 1)
            .collect();
        picked.push(0);
        picked.sort_unstable();
        let facts: Vec<Fact> = picked.iter().map(|&i| pool[i]).collect();
        let pre_score = draw_pre_score(aspect, &mut rng);
        let n_err = usize::from(5 - pre_score).min(facts.len());
        let mut error_facts = sample(&mut rng, facts.len(), n_err).into_vec();
        error_facts.sort_unstable();
        let planted_errors = error_facts
            .iter()
            .map(|&i| PlantedError { wrong_span: facts[i].wrong.into(), correct_span: facts[i].correct.into() })
            .collect();
        let frame_mention = rng.gen::<f64>() < frame_rate;
        Self {
            seed,
            media_uri: media_uri.into(),
            aspect,
            facts,
            error_facts,
            planted_errors,
            pre_score,
            convergence_residual: residual,
            frame_mention,
        }
    }

    pub fn caption_with_errors(&self, errors: &[usize]) -> String {
        let sentences: Vec<String> = self
            .facts
            .iter()
            .enumerate()
            .map(|(i, f)| f.render(if errors.contains(&i) { f.wrong } else { f.correct }))
            .collect();
        sentences.join(" ")
    }

    pub fn truth_caption(&self) -> String {
        self.caption_with_errors(&[])
    }

    pub fn pre_caption(&self) -> String {
        self.caption_with_errors(&self.error_facts)
    }

    /// Facts whose correct span is absent from `caption`.
    pub fn errors_in(&self, caption: &str) -> Vec<usize> {
        (0..self.facts.len()).filter(|&i| !caption.contains(self.facts[i].correct)).collect()
    }

    /// Likert score implied by the number of wrong facts.
    pub fn score_of(&self, caption: &str) -> u8 {
        5u8.saturating_sub(self.errors_in(caption).len() as u8).max(1)
    }
}
