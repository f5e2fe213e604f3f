//! Deterministic synthetic data shared by the integration and acceptance
//! tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use hearing_features::augment::{Tag, TaggedComment};
use hearing_features::evaluation::LabeledComment;
use hearing_features::gazetteer::OrgRegistry;
use hearing_features::stance::{Category, StanceLabel};
use hearing_features::transcript::{Hearing, Phase, Role, Speaker, TokenSpan, Utterance};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIRST: &[&str] = &[
    "Maria", "James", "Aisha", "Daniel", "Priya", "Robert", "Elena", "Marcus", "Grace", "Tomas",
    "Hannah", "Victor", "Lucia", "Kevin", "Nadia", "Oscar", "Ruth", "Samuel", "Teresa", "Wei",
];
pub const LAST: &[&str] = &[
    "Alvarez",
    "Brooks",
    "Chen",
    "Delgado",
    "Ellison",
    "Fischer",
    "Gutierrez",
    "Hayes",
    "Iverson",
    "Jensen",
    "Kowalski",
    "Lindqvist",
    "Moreno",
    "Nakamura",
    "Okafor",
    "Petrov",
    "Quintero",
    "Ramirez",
    "Sato",
    "Thornton",
];
const ORG_HEADS: &[&str] = &[
    "Coastal",
    "Valley",
    "Golden",
    "Sierra",
    "Pacific",
    "Harbor",
    "Redwood",
    "Central",
    "Northern",
    "Southern",
    "Desert",
    "Mountain",
    "Riverbend",
    "Bayside",
    "Delta",
    "Summit",
];
const ORG_TOPICS: &[&str] = &[
    "Water",
    "Housing",
    "Health",
    "Education",
    "Transit",
    "Energy",
    "Labor",
    "Farm",
    "Youth",
    "Senior",
    "Small Business",
    "Clean Air",
    "Public Safety",
    "Family",
    "Justice",
];
const ORG_KINDS: &[&str] = &[
    "Alliance",
    "Coalition",
    "Association",
    "Council",
    "Network",
    "Foundation",
    "Federation",
    "League",
    "Institute",
    "Partnership",
];
pub const PLACES: &[&str] = &[
    "Fresno",
    "Sacramento",
    "Oakland",
    "San Jose",
    "Long Beach",
    "Riverside",
    "Bakersfield",
    "Stockton",
    "Modesto",
    "Santa Rosa",
    "Alameda County",
    "Kern County",
];
const UNREGISTERED_TAILS: &[&str] = &[
    "Family Farms",
    "Tenants Union",
    "Parents Group",
    "Food Bank",
];
const GREETINGS: &[&str] = &[
    "Good morning,",
    "Good afternoon,",
    "Hello,",
    "Hi,",
    "Thank you, Madam Chair.",
];
const CUES: &[&str] = &["with", "representing", "on behalf of", "here with", "from"];
const FILLER: &[&str] = &[
    "this measure matters a great deal to the families we serve",
    "our members have followed the discussion closely all year",
    "we appreciate the author and the committee staff for their work",
    "the communities in our region have waited a long time for this",
    "there are still questions about funding and implementation",
];

pub fn person(rng: &mut impl Rng) -> (String, String) {
    let first = *FIRST.choose(rng).unwrap();
    let last = *LAST.choose(rng).unwrap();
    (format!("{first} {last}"), last.to_string())
}

/// `n` distinct capitalized organization names.
pub fn org_names(n: usize, seed: u64) -> Vec<String> {
    let mut all: Vec<String> = ORG_HEADS
        .iter()
        .flat_map(|h| {
            ORG_TOPICS
                .iter()
                .flat_map(move |t| ORG_KINDS.iter().map(move |k| format!("{h} {t} {k}")))
        })
        .collect();
    all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    all.truncate(n);
    all
}

pub fn registry(n: usize, seed: u64) -> OrgRegistry {
    let load = OrgRegistry::from_names(org_names(n, seed), PLACES.iter().copied());
    assert!(load.rejected.is_empty(), "{:?}", load.rejected);
    load.registry
}

fn stance_clause(rng: &mut impl Rng) -> &'static str {
    [
        "in support of this bill",
        "in strong opposition",
        "and we urge an aye vote",
        "and we oppose this measure",
        "in support",
        "with a respectful request for a no vote",
    ]
    .choose(rng)
    .copied()
    .unwrap()
}

/// Labeled public comments with planted registry organizations and
/// distractors: city names after a cue, the speaker's own name after a
/// cue, registry organizations mentioned late in the comment, and
/// organizations missing from the registry.
pub fn affiliation_corpus(n: usize, registry: &OrgRegistry, seed: u64) -> Vec<LabeledComment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orgs = registry.entries();
    (0..n)
        .map(|_| {
            let (name, last) = person(&mut rng);
            let greet = *GREETINGS.choose(&mut rng).unwrap();
            let cue = *CUES.choose(&mut rng).unwrap();
            let org = orgs.choose(&mut rng).unwrap().clone();
            let mut other = orgs.choose(&mut rng).unwrap().clone();
            while other == org {
                other = orgs.choose(&mut rng).unwrap().clone();
            }
            let stance = stance_clause(&mut rng);
            let city = *PLACES.choose(&mut rng).unwrap();
            let filler = *FILLER.choose(&mut rng).unwrap();
            let (comment, truth) = match rng.gen_range(0..9) {
                0 | 1 => (format!("{greet} my name is {name}, {cue} {org}, {stance}."), vec![org]),
                2 => (
                    format!("{name} {cue} {org} and {other}, {stance}."),
                    vec![org, other],
                ),
                3 => (
                    format!("{greet} {name} from {city}, {cue} {org}, {stance}."),
                    vec![org],
                ),
                4 => (
                    format!("Hi, this is a message from {name}, and I am calling {stance}."),
                    vec![],
                ),
                5 => (
                    format!(
                        "{name} {cue} {org}, {stance}. Honestly {filler}, and we have worked with {other} for many years."
                    ),
                    vec![org],
                ),
                6 => {
                    let tail = *UNREGISTERED_TAILS.choose(&mut rng).unwrap();
                    let unregistered = format!("{last} {tail}");
                    (
                        format!("{greet} my name is {name}, {cue} {unregistered}, {stance}."),
                        vec![unregistered],
                    )
                }
                7 => (format!("{name} from {city}, {stance}."), vec![]),
                _ => (format!("{greet} I am a resident and I am here {stance}."), vec![]),
            };
            LabeledComment {
                comment,
                speaker_name: Some(name),
                truth,
            }
        })
        .collect()
}

const STANCE_FILLER: &[&str] = &[
    "thank",
    "you",
    "chair",
    "and",
    "members",
    "my",
    "name",
    "is",
    "here",
    "today",
    "on",
    "behalf",
    "of",
    "our",
    "members",
    "this",
    "bill",
    "matters",
    "for",
    "families",
    "we",
    "appreciate",
    "the",
    "author",
];

/// Comments built from category phrases and neutral filler. Support and
/// Oppose comments carry one or two phrases of their side; Neutral ones
/// carry none, or one phrase of each side.
pub fn stance_samples(n: usize, seed: u64) -> Vec<(String, StanceLabel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = [
        Category::StrongSupport,
        Category::MediumSupport,
        Category::WeakSupport,
    ];
    let oppose = [Category::StrongOpposition, Category::MediumOpposition];
    let phrase = |rng: &mut ChaCha8Rng, cats: &[Category]| -> String {
        let cat = *cats.choose(rng).unwrap();
        cat.phrases().choose(rng).unwrap().to_string()
    };
    (0..n)
        .map(|_| {
            let label = *StanceLabel::ALL.choose(&mut rng).unwrap();
            let mut parts: Vec<String> = Vec::new();
            match label {
                StanceLabel::Support => {
                    for _ in 0..rng.gen_range(1..=2) {
                        parts.push(phrase(&mut rng, &support));
                    }
                }
                StanceLabel::Oppose => {
                    for _ in 0..rng.gen_range(1..=2) {
                        parts.push(phrase(&mut rng, &oppose));
                    }
                }
                StanceLabel::Neutral => {
                    if rng.gen_bool(0.15) {
                        parts.push(phrase(&mut rng, &support));
                        parts.push(phrase(&mut rng, &oppose));
                    }
                }
            }
            for _ in 0..rng.gen_range(3..10) {
                parts.push(STANCE_FILLER.choose(&mut rng).unwrap().to_string());
            }
            parts.shuffle(&mut rng);
            debug_assert!(parts.iter().all(|p| !p.is_empty()));
            (parts.join(" "), label)
        })
        .collect()
}

fn tokens_of(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

/// Tagged comments with zero, one or two organization slots.
pub fn tagged_comments(n: usize, registry: &OrgRegistry, seed: u64) -> Vec<TaggedComment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orgs = registry.entries();
    (0..n)
        .map(|i| {
            let (name, _) = person(&mut rng);
            let mut tokens: Vec<String> = Vec::new();
            let mut tags: Vec<Tag> = Vec::new();
            let mut slots = Vec::new();
            let push = |text: &str, tag: Tag, tokens: &mut Vec<String>, tags: &mut Vec<Tag>| {
                for t in tokens_of(text) {
                    tokens.push(t);
                    tags.push(tag);
                }
            };
            push("My name is", Tag::Other, &mut tokens, &mut tags);
            push(&name, Tag::Person, &mut tokens, &mut tags);
            for k in 0..(i % 3) {
                push(
                    if k == 0 { ", with" } else { "and" },
                    Tag::Other,
                    &mut tokens,
                    &mut tags,
                );
                let start = tokens.len();
                push(
                    orgs.choose(&mut rng).unwrap(),
                    Tag::Organization,
                    &mut tokens,
                    &mut tags,
                );
                slots.push(TokenSpan::new(start, tokens.len()));
            }
            push(", in support .", Tag::Other, &mut tokens, &mut tags);
            let c = TaggedComment {
                tokens,
                tags,
                org_slots: slots,
            };
            c.validate().unwrap();
            c
        })
        .collect()
}

/// Legislator pool shared by every synthetic hearing; ids are stable
/// across the corpus.
pub fn legislators() -> Vec<Speaker> {
    (0..16)
        .map(|k| Speaker {
            id: format!("leg-{k:02}"),
            full_name: format!("{} {}", FIRST[k], LAST[k]),
            last_name: LAST[k].to_string(),
            role: if k == 0 {
                Role::Chair
            } else {
                Role::Legislator
            },
        })
        .collect()
}

fn utterance(
    index: usize,
    speaker: &str,
    text: String,
    phase: Option<Phase>,
    timing: Option<(f64, f64)>,
) -> Utterance {
    Utterance {
        index,
        speaker: speaker.to_string(),
        text,
        start_seconds: timing.map(|t| t.0),
        end_seconds: timing.map(|t| t.1),
        phase,
    }
}

/// Hearings with discussion, questions, public comment and (mostly) a
/// secretary's roll call. A few are floor sessions, a few have no vote, and
/// some have most of the roster missing.
pub fn hearings(n: usize, registry: &OrgRegistry, seed: u64) -> Vec<Hearing> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = legislators();
    let comments = affiliation_corpus(n * 4, registry, seed ^ 0xA5A5);
    let mut comment_iter = comments.into_iter();
    (0..n)
        .map(|h| {
            let size = rng.gen_range(5..=9);
            let mut roster: Vec<Speaker> = pool.choose_multiple(&mut rng, size).cloned().collect();
            roster.sort_by(|a, b| a.id.cmp(&b.id));
            let secretary = Speaker {
                id: format!("sec-{}", h % 3),
                full_name: format!("Secretary {}", ["Abbott", "Baker", "Cole"][h % 3]),
                last_name: ["Abbott", "Baker", "Cole"][h % 3].to_string(),
                role: Role::CommitteeSecretary,
            };
            let witness = Speaker {
                id: format!("wit-{h}"),
                full_name: format!("Witness {}", LAST[h % LAST.len()]),
                last_name: LAST[h % LAST.len()].to_string(),
                role: Role::Witness,
            };
            let special = h % 11 == 5;
            let present: Vec<&Speaker> = if special {
                roster.iter().take(2).collect()
            } else {
                roster.iter().filter(|_| rng.gen_bool(0.85)).collect()
            };
            let timed = h % 2 == 0;
            let tag_phases = h % 3 != 0;
            let mut clock = 0.0;
            let mut utts: Vec<Utterance> = Vec::new();
            let mut speakers: Vec<Speaker> = roster.clone();
            speakers.push(secretary.clone());
            speakers.push(witness.clone());

            let mut say = |speaker: &str, text: String, phase: Option<Phase>, rng: &mut ChaCha8Rng, utts: &mut Vec<Utterance>| {
                let timing = if timed {
                    let start: f64 = clock;
                    let dur = rng.gen_range(2.0..90.0f64).round();
                    clock += dur + 1.0;
                    Some((start, start + dur))
                } else {
                    None
                };
                let index = utts.len();
                utts.push(utterance(index, speaker, text, phase, timing));
            };
            let discussion = tag_phases.then_some(Phase::Discussion);

            for _ in 0..rng.gen_range(2..6) {
                if present.is_empty() {
                    break;
                }
                let member = present.choose(&mut rng).unwrap();
                let question = if rng.gen_bool(0.6) {
                    "Can you explain how the program will be funded over the next five years?"
                } else {
                    "I have concerns about the implementation timeline and the cost to local agencies."
                };
                say(&member.id, question.to_string(), discussion, &mut rng, &mut utts);
                say(
                    &witness.id,
                    "Thank you, Senator. The funding comes from the existing account and the timeline is three years.".into(),
                    discussion,
                    &mut rng,
                    &mut utts,
                );
                if rng.gen_bool(0.5) {
                    say(&member.id, "Thank you, that answers my question.".into(), discussion, &mut rng, &mut utts);
                }
            }

            let public = tag_phases.then_some(Phase::PublicComment);
            if h % 7 != 3 {
                for k in 0..rng.gen_range(1..5) {
                    let item = comment_iter.next().expect("enough comments");
                    let name = item.speaker_name.clone().unwrap();
                    let id = format!("pub-{h}-{k}");
                    speakers.push(Speaker {
                        id: id.clone(),
                        last_name: name.split_whitespace().last().unwrap().to_string(),
                        full_name: name,
                        role: Role::PublicCommenter,
                    });
                    say(&id, item.comment, public, &mut rng, &mut utts);
                }
            }

            let has_vote = h % 9 != 4;
            if has_vote {
                let roll = tag_phases.then_some(Phase::RollCall);
                say(&secretary.id, "Call the roll.".into(), roll, &mut rng, &mut utts);
                for member in &roster {
                    say(&secretary.id, format!("{}?", member.last_name), roll, &mut rng, &mut utts);
                    if present.iter().any(|p| p.id == member.id) {
                        let answer = if rng.gen_bool(0.8) { "Aye." } else { "No." };
                        say(&member.id, answer.into(), roll, &mut rng, &mut utts);
                    }
                }
            }

            let used: BTreeSet<&str> = utts.iter().map(|u| u.speaker.as_str()).collect();
            let roster_ids: BTreeSet<String> = roster.iter().map(|s| s.id.clone()).collect();
            speakers.retain(|s| used.contains(s.id.as_str()) || roster_ids.contains(&s.id));
            Hearing {
                id: format!("hearing-{h:03}"),
                speakers,
                committee_roster: roster_ids,
                bill_id: Some(format!("SB-{}", 100 + h)),
                is_floor_session: h % 13 == 12,
                vote_recorded: has_vote,
                utterances: utts,
            }
        })
        .collect()
}
