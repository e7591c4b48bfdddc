//! Synthetic shooting-incident corpus.
//!
//! Each event gets one source article whose entity mentions are obscured with
//! probability `noise` (number words split into sums, the shooter left unnamed
//! while an officer is named, a neighbourhood or a decoy city in place of the
//! city), a handful of follow-up articles phrased in stereotypical templates,
//! and the corpus is salted with clean articles about other incidents that
//! share a city, venue or street with a real one.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Corpus, Document, EntitySchema, EntitySpec, Role, ValueKind};
use crate::error::{Error, Result};
use crate::text::{tokenize, Lexicons};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_events: usize,
    /// Distractor articles generated per event.
    pub distractor_ratio: f64,
    /// Probability that a source-article mention is obscured.
    pub noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            n_events: 300,
            distractor_ratio: 3.0,
            noise: 0.6,
        }
    }
}

/// ShooterName, NumKilled, NumWounded, City.
pub fn shootings_schema() -> EntitySchema {
    let spec = |name: &str, kind| EntitySpec {
        name: name.into(),
        kind,
    };
    EntitySchema::new(vec![
        spec("ShooterName", ValueKind::PersonName),
        spec("NumKilled", ValueKind::Numeric),
        spec("NumWounded", ValueKind::Numeric),
        spec("City", ValueKind::Categorical),
    ])
    .expect("static schema is valid")
}

const SURNAMES: &[&str] = &[
    "Adams",
    "Alvarez",
    "Baker",
    "Barnes",
    "Bennett",
    "Brooks",
    "Bryant",
    "Butler",
    "Campbell",
    "Carter",
    "Coleman",
    "Collins",
    "Cooper",
    "Crawford",
    "Daniels",
    "Dixon",
    "Edwards",
    "Ellis",
    "Evans",
    "Fisher",
    "Foster",
    "Garcia",
    "Gibson",
    "Gordon",
    "Graham",
    "Grant",
    "Griffin",
    "Hamilton",
    "Harper",
    "Hayes",
    "Henderson",
    "Holmes",
    "Howard",
    "Hughes",
    "Hunter",
    "Jenkins",
    "Jordan",
    "Kennedy",
    "Lawson",
    "Marshall",
    "Mason",
    "McCoy",
    "Mendez",
    "Meyer",
    "Mitchell",
    "Morales",
    "Murphy",
    "Nelson",
    "Owens",
    "Palmer",
    "Parker",
    "Perry",
    "Porter",
    "Powell",
    "Ramirez",
    "Reed",
    "Reyes",
    "Riley",
    "Russell",
    "Sanders",
    "Shaw",
    "Simmons",
    "Spencer",
    "Stewart",
    "Sullivan",
    "Tucker",
    "Turner",
    "Wagner",
    "Wallace",
    "Warren",
    "Watson",
    "Webb",
    "Wells",
    "Westerhuis",
    "Wheeler",
    "Woods",
];

const VENUES: &[&str] = &[
    "bar",
    "church",
    "school",
    "park",
    "mall",
    "restaurant",
    "nightclub",
    "apartment",
    "motel",
    "warehouse",
    "store",
    "home",
    "party",
    "festival",
    "diner",
    "gym",
    "hospital",
    "office",
];

const STREETS: &[&str] = &[
    "Dewey",
    "Linden",
    "Maple",
    "Oakwood",
    "Cedar",
    "Hawthorne",
    "Lincoln",
    "Jefferson",
    "Monroe",
    "Franklin",
    "Willow",
    "Chestnut",
    "Sycamore",
    "Magnolia",
    "Juniper",
    "Hickory",
    "Pershing",
    "Garfield",
    "Kimball",
    "Harmon",
    "Bramble",
    "Whitney",
    "Prescott",
    "Ellsworth",
    "Calloway",
    "Dunmore",
    "Fairview",
    "Greenleaf",
    "Holloway",
    "Kingsley",
    "Lockwood",
    "Marlowe",
    "Norwood",
    "Pemberton",
    "Quincy",
    "Rutherford",
    "Stanton",
    "Thornton",
    "Underwood",
    "Vance",
];

const STREET_KINDS: &[&str] = &["Avenue", "Street", "Road", "Boulevard", "Drive"];

const NEIGHBORHOODS: &[&str] = &[
    "Englewood",
    "Riverside",
    "Northgate",
    "Ashburn",
    "Brightmoor",
    "Eastwood",
    "Fairmount",
    "Glenwood",
    "Highland",
    "Ironbound",
    "Lakeview",
    "Midtown",
    "Oakcliff",
    "Parkside",
];

const COUNTIES: &[&str] = &[
    "Troup", "Lincoln", "Jasper", "Clay", "Marion", "Warren", "Pike", "Grant", "Union", "Logan",
];

const WEEKDAYS: &[&str] = &[
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
    "Sunday",
];

const NUMBER_WORDS: &[&str] = &[
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
];

const FILLERS: &[&str] = &[
    "Police are still searching for a motive .",
    "Anyone with information is asked to call investigators .",
    "Neighbors described the area as quiet .",
    "A vigil is planned for later this week .",
    "Officials said the investigation is ongoing .",
    "Crime scene tape surrounded the building for hours .",
    "Witnesses told reporters they heard several loud bangs .",
    "The mayor called the violence senseless .",
];

#[derive(Debug, Clone)]
struct Incident {
    first: String,
    last: String,
    killed: u32,
    wounded: u32,
    city: String,
    venue: &'static str,
    street: String,
    weekday: &'static str,
    date: i64,
    age: u32,
}

fn capitalize(word: &str) -> String {
    word.split(' ')
        .map(|w| {
            let mut cs = w.chars();
            match cs.next() {
                Some(c) => c.to_uppercase().chain(cs).collect(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

struct Vocab {
    male: Vec<String>,
    female: Vec<String>,
    cities: Vec<String>,
}

impl Vocab {
    fn bundled() -> Self {
        let lex = Lexicons::bundled();
        Self {
            male: lex.male_names.iter().map(|s| capitalize(s)).collect(),
            female: lex.female_names.iter().map(|s| capitalize(s)).collect(),
            cities: Lexicons::bundled_cities()
                .iter()
                .map(|s| capitalize(s))
                .collect(),
        }
    }

    fn person(&self, rng: &mut impl Rng) -> (String, String) {
        let first = if rng.gen_bool(0.85) {
            self.male.choose(rng)
        } else {
            self.female.choose(rng)
        };
        (
            first.expect("non-empty").clone(),
            SURNAMES.choose(rng).expect("non-empty").to_string(),
        )
    }
}

fn pick<'a>(rng: &mut impl Rng, items: &[&'a str]) -> &'a str {
    items.choose(rng).expect("non-empty list")
}

fn incident(rng: &mut impl Rng, vocab: &Vocab, date: i64) -> Incident {
    let (first, last) = vocab.person(rng);
    let killed = rng.gen_range(1..=8);
    let mut wounded = rng.gen_range(1..=9);
    while wounded == killed {
        wounded = rng.gen_range(1..=9);
    }
    Incident {
        first,
        last,
        killed,
        wounded,
        city: vocab.cities.choose(rng).expect("non-empty").clone(),
        venue: pick(rng, VENUES),
        street: format!("{} {}", pick(rng, STREETS), pick(rng, STREET_KINDS)),
        weekday: pick(rng, WEEKDAYS),
        date,
        age: rng.gen_range(17..=64),
    }
}

/// Digits most of the time, spelled out otherwise.
fn say_number(rng: &mut impl Rng, n: u32) -> String {
    if (n as usize) < NUMBER_WORDS.len() && rng.gen_bool(0.3) {
        NUMBER_WORDS[n as usize].to_string()
    } else {
        n.to_string()
    }
}

fn word_number(n: u32) -> String {
    NUMBER_WORDS
        .get(n as usize)
        .map_or_else(|| n.to_string(), |w| w.to_string())
}

/// A split `a + b = n` with both parts positive; `None` when `n < 2`.
fn split_number(rng: &mut impl Rng, n: u32) -> Option<(u32, u32)> {
    (n >= 2).then(|| {
        let a = rng.gen_range(1..n);
        (a, n - a)
    })
}

fn killed_clean(rng: &mut impl Rng, ev: &Incident) -> String {
    let k = say_number(rng, ev.killed);
    let (noun, verb) = if ev.killed == 1 {
        ("person", "was")
    } else {
        ("people", "were")
    };
    match rng.gen_range(0..3) {
        0 => format!("{k} {noun} {verb} killed in the shooting ."),
        1 => format!("The attack left {k} {noun} dead ."),
        _ => format!("Police said {k} {noun} {verb} killed ."),
    }
}

fn wounded_clean(rng: &mut impl Rng, ev: &Incident) -> String {
    let w = say_number(rng, ev.wounded);
    let (noun, verb) = if ev.wounded == 1 {
        ("person", "was")
    } else {
        ("people", "were")
    };
    match rng.gen_range(0..3) {
        0 => format!("{w} {noun} {verb} wounded ."),
        1 => format!("Another {w} {noun} {verb} injured and taken to a hospital ."),
        _ => format!("Officials said {w} {noun} {verb} wounded in the attack ."),
    }
}

fn shooter_clean(rng: &mut impl Rng, ev: &Incident) -> String {
    let (f, l, age) = (&ev.first, &ev.last, ev.age);
    match rng.gen_range(0..4) {
        0 => format!("Police identified the gunman as {f} {l} , {age} ."),
        1 => format!("{f} {l} , {age} , opened fire before fleeing ."),
        2 => format!("Authorities said {f} {l} was arrested and charged ."),
        _ => format!("The suspected shooter , {f} {l} , was taken into custody ."),
    }
}

fn city_clean(rng: &mut impl Rng, ev: &Incident) -> String {
    let c = &ev.city;
    match rng.gen_range(0..3) {
        0 => format!("The shooting happened in {c} , police said ."),
        1 => format!("Officers in {c} responded to reports of shots fired ."),
        _ => format!("It was the deadliest shooting in {c} this year ."),
    }
}

fn killed_obscure(rng: &mut impl Rng, ev: &Incident) -> String {
    match split_number(rng, ev.killed) {
        Some((1, b)) => format!(
            "A woman and her {} children were found dead inside .",
            word_number(b)
        ),
        Some((a, b)) => format!(
            "{} adults and {} children were found dead inside .",
            capitalize(&word_number(a)),
            word_number(b)
        ),
        None => format!("A {} - year - old man was found dead inside .", ev.age),
    }
}

fn wounded_obscure(rng: &mut impl Rng, ev: &Incident) -> String {
    match split_number(rng, ev.wounded) {
        Some((a, b)) => format!(
            "{} others were rushed to a hospital and {} were treated at the scene .",
            capitalize(&word_number(a)),
            word_number(b)
        ),
        None => "Another person suffered a graze wound .".to_string(),
    }
}

fn shooter_obscure(rng: &mut impl Rng, vocab: &Vocab) -> String {
    let (f, l) = vocab.person(rng);
    match rng.gen_range(0..2) {
        0 => format!(
            "The gunman , who later died , was not immediately identified , Sgt . {f} {l} said ."
        ),
        _ => {
            format!("A relative was later taken into custody , said {f} {l} , a police spokesman .")
        }
    }
}

fn city_obscure(rng: &mut impl Rng, vocab: &Vocab, ev: &Incident) -> String {
    match rng.gen_range(0..3) {
        0 => format!(
            "The shooting happened in the {} neighborhood , police said .",
            pick(rng, NEIGHBORHOODS)
        ),
        1 => {
            let mut other = vocab.cities.choose(rng).expect("non-empty");
            while *other == ev.city {
                other = vocab.cities.choose(rng).expect("non-empty");
            }
            format!("The victims had recently moved from {other} , relatives said .")
        }
        _ => format!(
            "Deputies from {} County responded to reports of shots fired .",
            pick(rng, COUNTIES)
        ),
    }
}

fn fillers(rng: &mut impl Rng, ev: &Incident, n: usize) -> Vec<String> {
    let mut out: Vec<String> = FILLERS
        .choose_multiple(rng, n)
        .map(|s| s.to_string())
        .collect();
    if rng.gen_bool(0.5) {
        out.push(format!(
            "The {} on {} remained closed .",
            ev.venue, ev.street
        ));
    }
    out
}

fn source_article(
    rng: &mut impl Rng,
    vocab: &Vocab,
    ev: &Incident,
    noise: f64,
) -> (String, String) {
    let title = match rng.gen_range(0..4) {
        0 => format!(
            "{} shooting at {} on {} under investigation",
            ev.weekday, ev.venue, ev.street
        ),
        1 => format!(
            "Police investigate deadly {} shooting on {}",
            ev.venue, ev.street
        ),
        2 => format!(
            "Gunfire at {} {} leaves community shaken",
            ev.street, ev.venue
        ),
        _ => format!(
            "Investigators return to {} on {} after shooting",
            ev.venue, ev.street
        ),
    };
    let mut sentences = vec![
        if rng.gen_bool(noise) {
            shooter_obscure(rng, vocab)
        } else {
            shooter_clean(rng, ev)
        },
        if rng.gen_bool(noise) {
            killed_obscure(rng, ev)
        } else {
            killed_clean(rng, ev)
        },
        if rng.gen_bool(noise) {
            wounded_obscure(rng, ev)
        } else {
            wounded_clean(rng, ev)
        },
        if rng.gen_bool(noise) {
            city_obscure(rng, vocab, ev)
        } else {
            city_clean(rng, ev)
        },
    ];
    let n_fill = rng.gen_range(1..=3);
    sentences.extend(fillers(rng, ev, n_fill));
    sentences.shuffle(rng);
    let intro = format!(
        "Gunfire broke out at a {} on {} {} night .",
        ev.venue, ev.street, ev.weekday
    );
    sentences.insert(0, intro);
    (title, sentences.join(" "))
}

/// A stereotypically phrased article. With `noise > 0` some mentions are
/// dropped or obscured.
fn clean_article(rng: &mut impl Rng, vocab: &Vocab, ev: &Incident, noise: f64) -> (String, String) {
    let title = match rng.gen_range(0..4) {
        0 => format!(
            "{} {} shooting on {} : what we know",
            ev.city, ev.venue, ev.street
        ),
        1 => format!("Victims remembered after {} shooting", ev.venue),
        2 => format!(
            "Update on {} shooting at {} {}",
            ev.weekday, ev.street, ev.venue
        ),
        _ => format!(
            "{} police release details of {} shooting",
            ev.city, ev.venue
        ),
    };
    let mut sentences = Vec::new();
    let mut mention = |rng: &mut ChaCha8Rng, clean: String, obscure: String| {
        let r: f64 = rng.gen();
        if r < noise * 0.3 {
        } else if r < noise * 0.45 {
            sentences.push(obscure);
        } else {
            sentences.push(clean);
        }
    };
    let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
    let (c, o) = (
        shooter_clean(&mut local, ev),
        shooter_obscure(&mut local, vocab),
    );
    mention(&mut local, c, o);
    let (c, o) = (killed_clean(&mut local, ev), killed_obscure(&mut local, ev));
    mention(&mut local, c, o);
    let (c, o) = (
        wounded_clean(&mut local, ev),
        wounded_obscure(&mut local, ev),
    );
    mention(&mut local, c, o);
    let (c, o) = (
        city_clean(&mut local, ev),
        city_obscure(&mut local, vocab, ev),
    );
    mention(&mut local, c, o);
    let n_fill = local.gen_range(0..=2);
    sentences.extend(fillers(&mut local, ev, n_fill));
    sentences.shuffle(&mut local);
    sentences.insert(
        0,
        format!(
            "The shooting at the {} on {} happened {} .",
            ev.venue, ev.street, ev.weekday
        ),
    );
    (title, sentences.join(" "))
}

fn document(
    id: String,
    (title, body): (String, String),
    date: i64,
    role: Role,
    event: Option<&str>,
) -> Document {
    Document {
        id,
        title: tokenize(&title),
        body: tokenize(&body),
        date,
        role,
        event_id: event.map(String::from),
        query_index: None,
    }
}

/// Deterministic in every argument.
pub fn generate_synthetic_corpus(config: &SyntheticConfig) -> Result<Corpus> {
    if config.n_events == 0 {
        return Err(Error::Config(
            "synthetic corpus needs at least one event".into(),
        ));
    }
    if !(0.0..=1.0).contains(&config.noise) {
        return Err(Error::Config(format!(
            "noise {} outside [0, 1]",
            config.noise
        )));
    }
    if config.distractor_ratio.is_nan() || config.distractor_ratio < 0.0 {
        return Err(Error::Config(
            "distractor_ratio must be non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vocab = Vocab::bundled();
    let schema = shootings_schema();

    let mut documents = Vec::new();
    let mut annotations = Vec::new();
    let mut incidents = Vec::with_capacity(config.n_events);
    for e in 0..config.n_events {
        let event_id = format!("ev{e:04}");
        let date = 16_000 + rng.gen_range(0..1_000);
        let ev = incident(&mut rng, &vocab, date);
        let src = source_article(&mut rng, &vocab, &ev, config.noise);
        documents.push(document(
            format!("{event_id}-src"),
            src,
            date,
            Role::Source,
            Some(&event_id),
        ));
        let n_extra = rng.gen_range(3..=10);
        for x in 0..n_extra {
            let art = clean_article(&mut rng, &vocab, &ev, config.noise);
            let day = date + rng.gen_range(-2..=14);
            documents.push(document(
                format!("{event_id}-x{x:02}"),
                art,
                day,
                Role::Downloaded,
                None,
            ));
        }
        annotations.push((
            event_id,
            BTreeMap::from([
                (
                    "ShooterName".to_string(),
                    vec![format!("{} {}", ev.first, ev.last)],
                ),
                ("NumKilled".to_string(), vec![ev.killed.to_string()]),
                ("NumWounded".to_string(), vec![ev.wounded.to_string()]),
                ("City".to_string(), vec![ev.city.clone()]),
            ]),
        ));
        incidents.push(ev);
    }

    let n_distractors = (config.distractor_ratio * config.n_events as f64).round() as usize;
    for d in 0..n_distractors {
        let target = incidents.choose(&mut rng).expect("n_events >= 1");
        let date = target.date + rng.gen_range(-45..=45);
        let mut fake = incident(&mut rng, &vocab, date.max(0));
        fake.city = target.city.clone();
        if rng.gen_bool(0.5) {
            fake.venue = target.venue;
        }
        if rng.gen_bool(0.25) {
            fake.street = target.street.clone();
        }
        let art = clean_article(&mut rng, &vocab, &fake, config.noise);
        documents.push(document(
            format!("dx{d:05}"),
            art,
            fake.date,
            Role::Downloaded,
            None,
        ));
    }

    Corpus::new(schema, documents, annotations)
}
