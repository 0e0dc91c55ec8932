//! Seeded generator for small synthetic stance datasets.
//!
//! Related documents restate the claim's event and add cue sentences typical
//! of their stance; unrelated documents describe a different event with
//! cue sentences drawn from any stance.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{StanceLabel, TrainingExample};

const SUBJECTS: &[&str] = &[
    "the mayor",
    "the senator",
    "the company",
    "the minister",
    "the city council",
    "the scientists",
    "the governor",
    "the museum",
    "the army",
    "the hospital",
    "the university",
    "the federal agency",
];

const VERBS: &[&str] = &[
    "opened", "closed", "approved", "banned", "built", "sold", "launched", "cancelled", "funded",
    "discovered",
];

const OBJECTS: &[&str] = &[
    "a new bridge",
    "the old stadium",
    "a vaccine program",
    "the river port",
    "a solar farm",
    "the railway line",
    "a public library",
    "the border fence",
    "a space mission",
    "the coal mine",
    "a research lab",
    "the harbor tunnel",
];

const AGREE: &[&str] = &[
    "Officials confirmed that {event}.",
    "The records verify that {event}, and the account is accurate.",
    "It is true that {event}, the documents show.",
    "The claim that {event} is correct, as the official statement confirmed.",
    "Independent checks verified that {event}; a report was accurate.",
];

const DISAGREE: &[&str] = &[
    "Reports that {event} are false.",
    "The claim that {event} was debunked as a hoax.",
    "Officials denied that {event}; the story is fabricated.",
    "It is not true that {event}, and the rumor is misleading.",
    "Fact checkers rejected the claim that {event} as incorrect.",
];

const DISCUSS: &[&str] = &[
    "Some outlets say {event}, according to unverified sources.",
    "It is alleged that {event}, but the details remain unclear.",
    "Critics debate whether {event}; the story is unconfirmed.",
    "Rumors suggest that {event}, though nobody has commented yet.",
    "Reportedly {event}, a person familiar with the matter was quoted as saying.",
    "The claim that {event} is disputed by some observers.",
];

const FILLER: &[&str] = &[
    "The weather was mild for most of the week.",
    "Local residents gathered downtown on Saturday.",
    "Traffic in the area was heavier than usual.",
    "A spokesperson is expected to speak on Monday.",
    "The region has a long history of trade.",
    "Prices at the market rose slightly over the summer.",
    "The building was renovated several years ago.",
    "Visitors often arrive by train from the north.",
    "The local school celebrated its annual festival.",
    "Heavy rain delayed several flights in the evening.",
];

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

fn event(rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
    (
        rng.random_range(0..SUBJECTS.len()),
        rng.random_range(0..VERBS.len()),
        rng.random_range(0..OBJECTS.len()),
    )
}

fn event_text(e: (usize, usize, usize)) -> String {
    format!("{} {} {}", SUBJECTS[e.0], VERBS[e.1], OBJECTS[e.2])
}

fn cue_sentences(rng: &mut ChaCha8Rng, templates: &[&str], event: &str, n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for _ in 0..n {
        let t = templates.choose(rng).expect("templates are non-empty");
        out.push(capitalize(&t.replace("{event}", event)));
    }
    out
}

/// `per_label` examples of each stance, interleaved by label.
pub fn toy_dataset(per_label: usize, seed: u64) -> Vec<TrainingExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(4 * per_label);
    for _ in 0..per_label {
        for label in StanceLabel::ALL {
            let claim_event = event(&mut rng);
            let claim = format!("{}.", capitalize(&event_text(claim_event)));
            let claim_ev = event_text(claim_event);
            let n = rng.random_range(1..=2);
            let mut sentences = match label {
                StanceLabel::Agree => cue_sentences(&mut rng, AGREE, &claim_ev, n),
                StanceLabel::Disagree => cue_sentences(&mut rng, DISAGREE, &claim_ev, n),
                StanceLabel::Discuss => cue_sentences(&mut rng, DISCUSS, &claim_ev, n),
                StanceLabel::Unrelated => {
                    let mut other = event(&mut rng);
                    while other.0 == claim_event.0 || other.2 == claim_event.2 {
                        other = event(&mut rng);
                    }
                    let pool = [AGREE, DISAGREE, DISCUSS][rng.random_range(0..3)];
                    cue_sentences(&mut rng, pool, &event_text(other), n)
                }
            };
            for _ in 0..rng.random_range(0..=3) {
                let filler = FILLER.choose(&mut rng).expect("non-empty").to_string();
                let at = rng.random_range(0..=sentences.len());
                sentences.insert(at, filler);
            }
            out.push(TrainingExample {
                claim,
                document: sentences.join(" "),
                stance: label,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_and_deterministic() {
        let a = toy_dataset(5, 0);
        assert_eq!(a.len(), 20);
        for label in StanceLabel::ALL {
            assert_eq!(a.iter().filter(|e| e.stance == label).count(), 5);
        }
        assert_eq!(a, toy_dataset(5, 0));
        assert_ne!(a, toy_dataset(5, 1));
    }
}
