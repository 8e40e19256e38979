//! Regenerates the bundled mini dataset under `data/mini/`.
//!
//! The corpus is synthetic: nouns live in topic clusters (shared context
//! words), and each verb selects its subjects and objects from fixed topics.
//! Five verbs are deliberately ambiguous, with two argument-distinct senses
//! each, so sense-matched sentence pairs should score higher than
//! sense-mismatched ones. Everything is seeded; running this twice produces
//! identical files.
//!
//! Run with: cargo run -p verbmat --example generate_bundled_data

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Topic {
    name: &'static str,
    ctx: &'static [&'static str],
    nouns: &'static [&'static str],
}

const TOPICS: &[Topic] = &[
    Topic { name: "media", ctx: &["news", "page", "press", "editor", "print", "daily", "column", "journal"], nouns: &["report", "article", "story", "headline", "essay", "review"] },
    Topic { name: "attention", ctx: &["public", "focus", "gather", "notice", "buzz", "spotlight", "hype", "fame"], nouns: &["attention", "interest", "crowd", "audience", "publicity", "assembly", "delegation", "parliament"] },
    Topic { name: "art", ctx: &["canvas", "gallery", "paint", "colour", "brush", "frame", "studio", "ink"], nouns: &["picture", "portrait", "sketch", "mural", "cartoon", "diagram"] },
    Topic { name: "creative", ctx: &["young", "school", "lesson", "talent", "class", "teacher"], nouns: &["child", "artist", "painter", "student", "designer", "pupil"] },
    Topic { name: "legal_people", ctx: &["legal", "court", "judge", "law", "case", "justice"], nouns: &["lawyer", "attorney", "plaintiff", "clerk", "prosecutor", "counsel"] },
    Topic { name: "legal_docs", ctx: &["legal", "court", "judge", "law", "case", "justice"], nouns: &["lawsuit", "claim", "appeal", "petition", "complaint", "motion"] },
    Topic { name: "craft", ctx: &["tool", "workshop", "bench", "timber", "saw", "chisel"], nouns: &["carpenter", "builder", "joiner", "craftsman", "apprentice", "woodworker"] },
    Topic { name: "materials", ctx: &["tool", "workshop", "rough", "smooth", "grain", "steel"], nouns: &["wood", "metal", "blade", "surface", "edge", "plank"] },
    Topic { name: "business_people", ctx: &["office", "corporate", "senior", "staff", "chief", "boardroom"], nouns: &["manager", "director", "owner", "executive", "founder", "boss"] },
    Topic { name: "business_things", ctx: &["money", "trade", "office", "deal", "sell", "share"], nouns: &["company", "firm", "market", "profit", "budget", "contract"] },
    Topic { name: "money", ctx: &["money", "pay", "cost", "bank", "bill", "account"], nouns: &["fee", "price", "rent", "toll", "fare", "tax"] },
    Topic { name: "military", ctx: &["battle", "war", "army", "camp", "banner", "march"], nouns: &["soldier", "troop", "knight", "warrior", "cavalry", "regiment"] },
    Topic { name: "military_targets", ctx: &["battle", "war", "wall", "gate", "siege", "stone"], nouns: &["enemy", "fortress", "castle", "stronghold", "garrison", "rampart"] },
    Topic { name: "speakers", ctx: &["podium", "speech", "stage", "microphone", "rally", "hall"], nouns: &["speaker", "politician", "president", "chairman", "minister", "senator"] },
    Topic { name: "civic", ctx: &["plan", "policy", "meeting", "session", "reform", "agenda"], nouns: &["engineer", "committee", "government", "agency", "council", "board"] },
    Topic { name: "problems", ctx: &["plan", "policy", "urgent", "serious", "reform", "agenda"], nouns: &["problem", "issue", "crisis", "flaw", "shortage", "backlog"] },
    Topic { name: "animals", ctx: &["wild", "fur", "tail", "farm", "species", "paw"], nouns: &["dog", "cat", "horse", "bird", "lion", "wolf"] },
    Topic { name: "food", ctx: &["kitchen", "taste", "fresh", "oven", "plate", "spice"], nouns: &["meal", "bread", "soup", "cake", "dinner", "fruit"] },
    Topic { name: "sport", ctx: &["track", "speed", "finish", "stadium", "lap", "medal"], nouns: &["race", "marathon", "relay", "contest", "tournament", "derby"] },
    Topic { name: "active", ctx: &["fit", "strong", "fast", "team", "coach", "arena"], nouns: &["athlete", "runner", "player", "jogger", "sprinter", "champion"] },
    Topic { name: "services", ctx: &["welfare", "community", "access", "free", "scheme", "outreach"], nouns: &["support", "help", "service", "programme", "benefit", "aid"] },
];

struct Sense {
    subjects: Subjects,
    objects: Subjects,
}

enum Subjects {
    Topic(&'static str),
    Words(&'static [&'static str]),
}

struct VerbSpec {
    verb: &'static str,
    senses: &'static [Sense],
}

const VERBS: &[VerbSpec] = &[
    // five ambiguous verbs, two argument-distinct senses each
    VerbSpec { verb: "draw", senses: &[
        Sense { subjects: Subjects::Topic("media"), objects: Subjects::Topic("attention") },
        Sense { subjects: Subjects::Topic("creative"), objects: Subjects::Topic("art") },
    ]},
    VerbSpec { verb: "run", senses: &[
        Sense { subjects: Subjects::Topic("business_people"), objects: Subjects::Topic("business_things") },
        Sense { subjects: Subjects::Topic("active"), objects: Subjects::Topic("sport") },
    ]},
    VerbSpec { verb: "file", senses: &[
        Sense { subjects: Subjects::Topic("legal_people"), objects: Subjects::Topic("legal_docs") },
        Sense { subjects: Subjects::Topic("craft"), objects: Subjects::Topic("materials") },
    ]},
    VerbSpec { verb: "charge", senses: &[
        Sense { subjects: Subjects::Words(&["company", "firm", "owner", "boss"]), objects: Subjects::Topic("money") },
        Sense { subjects: Subjects::Topic("military"), objects: Subjects::Topic("military_targets") },
    ]},
    VerbSpec { verb: "address", senses: &[
        Sense { subjects: Subjects::Topic("speakers"), objects: Subjects::Words(&["audience", "crowd", "assembly", "delegation", "parliament"]) },
        Sense { subjects: Subjects::Topic("civic"), objects: Subjects::Topic("problems") },
    ]},
    // landmark verbs, one sense each, mirroring one sense of an ambiguous verb
    VerbSpec { verb: "attract", senses: &[
        Sense { subjects: Subjects::Topic("media"), objects: Subjects::Topic("attention") },
    ]},
    VerbSpec { verb: "depict", senses: &[
        Sense { subjects: Subjects::Topic("creative"), objects: Subjects::Topic("art") },
    ]},
    VerbSpec { verb: "manage", senses: &[
        Sense { subjects: Subjects::Topic("business_people"), objects: Subjects::Topic("business_things") },
    ]},
    VerbSpec { verb: "sprint", senses: &[
        Sense { subjects: Subjects::Topic("active"), objects: Subjects::Topic("sport") },
    ]},
    VerbSpec { verb: "submit", senses: &[
        Sense { subjects: Subjects::Topic("legal_people"), objects: Subjects::Topic("legal_docs") },
    ]},
    VerbSpec { verb: "grind", senses: &[
        Sense { subjects: Subjects::Topic("craft"), objects: Subjects::Topic("materials") },
    ]},
    VerbSpec { verb: "levy", senses: &[
        Sense { subjects: Subjects::Words(&["company", "firm", "government", "council"]), objects: Subjects::Topic("money") },
    ]},
    VerbSpec { verb: "attack", senses: &[
        Sense { subjects: Subjects::Topic("military"), objects: Subjects::Topic("military_targets") },
    ]},
    VerbSpec { verb: "greet", senses: &[
        Sense { subjects: Subjects::Topic("speakers"), objects: Subjects::Words(&["audience", "crowd", "assembly", "delegation"]) },
    ]},
    VerbSpec { verb: "resolve", senses: &[
        Sense { subjects: Subjects::Topic("civic"), objects: Subjects::Topic("problems") },
    ]},
    // filler verbs for grid variety
    VerbSpec { verb: "eat", senses: &[
        Sense { subjects: Subjects::Words(&["dog", "cat", "horse", "bird", "lion", "wolf", "child", "student", "pupil"]), objects: Subjects::Topic("food") },
    ]},
    VerbSpec { verb: "chase", senses: &[
        Sense { subjects: Subjects::Topic("animals"), objects: Subjects::Topic("animals") },
    ]},
    VerbSpec { verb: "write", senses: &[
        Sense { subjects: Subjects::Topic("creative"), objects: Subjects::Words(&["report", "article", "story", "essay", "review"]) },
    ]},
    VerbSpec { verb: "buy", senses: &[
        Sense { subjects: Subjects::Topic("business_people"), objects: Subjects::Words(&["wood", "metal", "plank", "bread", "fruit", "meal"]) },
    ]},
    VerbSpec { verb: "provide", senses: &[
        Sense { subjects: Subjects::Words(&["company", "firm", "government", "agency", "council"]), objects: Subjects::Topic("services") },
    ]},
];

/// Per-pair counts, most frequent combination first.
const COUNT_SCHEDULE: &[u64] = &[
    36, 27, 24, 21, 18, 15, 15, 12, 12, 9, 9, 9, 6, 6, 6, 6, 5, 5, 4, 4, 3, 3, 2, 2,
];

const COHERENCE_SENTENCES_PER_NOUN: usize = 32;

fn topic(name: &str) -> &'static Topic {
    TOPICS.iter().find(|t| t.name == name).expect("topic name")
}

fn words_of(s: &Subjects) -> Vec<&'static str> {
    match s {
        Subjects::Topic(t) => topic(t).nouns.to_vec(),
        Subjects::Words(w) => w.to_vec(),
    }
}

fn noun_topic(noun: &str) -> &'static Topic {
    TOPICS
        .iter()
        .find(|t| t.nouns.contains(&noun))
        .unwrap_or_else(|| panic!("noun '{noun}' not in any topic"))
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini");
    fs::create_dir_all(&root).expect("create data/mini");

    // --- triples -----------------------------------------------------------
    let mut triples: BTreeMap<(String, String, String), u64> = BTreeMap::new();
    for spec in VERBS {
        for sense in spec.senses {
            let subjects = words_of(&sense.subjects);
            let objects = words_of(&sense.objects);
            let mut rank = 0usize;
            for (i, s) in subjects.iter().enumerate() {
                for (j, o) in objects.iter().enumerate() {
                    if s == o {
                        continue;
                    }
                    // deterministic ~70% thinning of the cross product
                    if (i * 7 + j * 11 + subjects.len()) % 10 >= 7 {
                        continue;
                    }
                    if rank >= COUNT_SCHEDULE.len() {
                        break;
                    }
                    let count = COUNT_SCHEDULE[rank];
                    rank += 1;
                    *triples
                        .entry((s.to_string(), spec.verb.to_string(), o.to_string()))
                        .or_insert(0) += count;
                }
            }
            assert!(rank >= 12, "sense of '{}' has only {rank} pairs", spec.verb);
        }
    }

    let mut triples_tsv = String::new();
    for ((s, v, o), c) in &triples {
        writeln!(triples_tsv, "{s}\t{v}\t{o}\t{c}").unwrap();
    }
    fs::write(root.join("triples.tsv"), &triples_tsv).expect("write triples");

    // --- corpus -------------------------------------------------------------
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut sentences: Vec<String> = Vec::new();

    for ((s, v, o), count) in &triples {
        let s_ctx = noun_topic(s).ctx;
        let o_ctx = noun_topic(o).ctx;
        for _ in 0..*count {
            let c1 = s_ctx[rng.random_range(0..s_ctx.len())];
            let c2 = o_ctx[rng.random_range(0..o_ctx.len())];
            sentences.push(format!("{c1} {s} {v} {o} {c2}"));
        }
    }

    for t in TOPICS {
        for noun in t.nouns {
            for i in 0..COHERENCE_SENTENCES_PER_NOUN {
                let c1 = t.ctx[rng.random_range(0..t.ctx.len())];
                let c2 = t.ctx[rng.random_range(0..t.ctx.len())];
                if i % 3 == 0 {
                    let c3 = t.ctx[rng.random_range(0..t.ctx.len())];
                    sentences.push(format!("{c1} {noun} {c2} {c3}"));
                } else {
                    sentences.push(format!("{c1} {noun} {c2}"));
                }
            }
        }
    }

    sentences.shuffle(&mut rng);
    let mut corpus = sentences.join("\n");
    corpus.push('\n');
    fs::write(root.join("corpus.txt"), &corpus).expect("write corpus");

    // --- sanity: every dataset word must be attested -------------------------
    let vocab: std::collections::HashSet<&str> = corpus.split_whitespace().collect();
    let in_vocab = |w: &str| {
        assert!(vocab.contains(w), "dataset word '{w}' missing from corpus");
    };

    // --- verb-disambiguation toy dataset (gs2011 layout) --------------------
    // columns: annotator verb subject object landmark rating group
    let contrasts: &[(&str, &str, &str, &str, &str)] = &[
        // (subject, ambiguous verb, object, matched landmark, mismatched landmark)
        ("report", "draw", "attention", "attract", "depict"),
        ("manager", "run", "company", "manage", "sprint"),
        ("lawyer", "file", "lawsuit", "submit", "grind"),
        ("company", "charge", "fee", "levy", "attack"),
        ("speaker", "address", "audience", "greet", "resolve"),
        // the opposite sense of each ambiguous verb
        ("child", "draw", "picture", "depict", "attract"),
        ("athlete", "run", "race", "sprint", "manage"),
        ("carpenter", "file", "wood", "grind", "submit"),
        ("soldier", "charge", "fortress", "attack", "levy"),
        ("committee", "address", "problem", "resolve", "greet"),
    ];
    let mut gs = String::from("participant verb subject object landmark input hilo\n");
    for (s, v, o, high, low) in contrasts {
        in_vocab(s);
        in_vocab(v);
        in_vocab(o);
        for (ann, base) in [(1, 7.0), (2, 6.0), (3, 7.0)] {
            let jitter = rng.random_range(-1.0f64..0.5).round();
            let rating = (base + jitter).clamp(1.0, 7.0);
            writeln!(gs, "{ann} {v} {s} {o} {high} {rating} HIGH").unwrap();
        }
        for (ann, base) in [(1, 1.0), (2, 2.0), (3, 1.0)] {
            let jitter = rng.random_range(-0.5f64..1.0).round();
            let rating = (base + jitter).clamp(1.0, 7.0);
            writeln!(gs, "{ann} {v} {s} {o} {low} {rating} LOW").unwrap();
        }
    }
    fs::write(root.join("gs_toy.tsv"), &gs).expect("write gs_toy");

    // --- sentence-similarity toy dataset (ks2013 layout) --------------------
    // columns: annotator subject1 verb1 object1 subject2 verb2 object2 rating
    let ks_pairs: &[(&str, &str, &str, &str, &str, &str, f64)] = &[
        ("company", "provide", "support", "government", "provide", "aid", 7.0),
        ("firm", "provide", "service", "agency", "provide", "help", 6.0),
        ("soldier", "attack", "fortress", "troop", "attack", "castle", 7.0),
        ("dog", "chase", "cat", "wolf", "chase", "bird", 6.0),
        ("student", "write", "essay", "pupil", "write", "story", 6.0),
        ("manager", "manage", "budget", "director", "manage", "contract", 6.0),
        ("lawyer", "submit", "appeal", "clerk", "submit", "petition", 6.0),
        ("company", "levy", "tax", "firm", "charge", "fee", 5.0),
        ("knight", "attack", "castle", "soldier", "charge", "enemy", 5.0),
        ("artist", "depict", "portrait", "student", "write", "essay", 4.0),
        ("child", "eat", "cake", "dog", "eat", "bread", 4.0),
        ("engineer", "resolve", "flaw", "council", "address", "crisis", 4.0),
        ("child", "eat", "fruit", "knight", "attack", "castle", 1.0),
        ("runner", "sprint", "race", "company", "levy", "tax", 1.0),
        ("politician", "greet", "crowd", "carpenter", "grind", "wood", 1.0),
        ("horse", "chase", "bird", "minister", "address", "parliament", 1.0),
        ("speaker", "greet", "audience", "builder", "grind", "metal", 2.0),
        // deliberately out-of-vocabulary subject; evaluation must skip it
        ("zebra", "chase", "cat", "dog", "chase", "cat", 5.0),
    ];
    let mut ks = String::from("annotator subject1 verb1 object1 subject2 verb2 object2 score\n");
    for (s1, v1, o1, s2, v2, o2, base) in ks_pairs {
        if *s1 != "zebra" {
            for w in [s1, v1, o1, s2, v2, o2] {
                in_vocab(w);
            }
        }
        for ann in 1..=3 {
            let jitter = rng.random_range(-1.0f64..1.0).round();
            let rating = (base + jitter).clamp(1.0, 7.0);
            writeln!(ks, "{ann} {s1} {v1} {o1} {s2} {v2} {o2} {rating}").unwrap();
        }
    }
    fs::write(root.join("ks_toy.tsv"), &ks).expect("write ks_toy");

    // --- pipeline config ------------------------------------------------------
    let config = r#"# Mini experiment over the bundled synthetic corpus.
# Paths are resolved relative to this file.

corpus = "corpus.txt"
triples = "triples.tsv"
window = 3
min_count = 5
dims = [5, 20]
svd_scaling = "us"
regimes = ["dist", "reg", "reg+"]
compositions = ["add", "mult", "co", "cs", "f+", "re", "vo"]
seed = 42
out_dir = "../../out/mini"
write_details = true

[data]
min_noun_freq = 50
top_n = 1000
neg_n = 1000
freq_band = 0.5

[regression]
lambda = 1e-3
rho = 0.95
epsilon = 1e-6
batch = 32
max_epochs = 200
patience = 10
loss = "xent"

[[datasets]]
name = "gs_toy"
path = "gs_toy.tsv"
format = "gs2011"

[[datasets]]
name = "ks_toy"
path = "ks_toy.tsv"
format = "ks2013"
"#;
    fs::write(root.join("config.toml"), config).expect("write config");

    // --- report ---------------------------------------------------------------
    let tokens = corpus.split_whitespace().count();
    let mut freqs: BTreeMap<&str, u64> = BTreeMap::new();
    for w in corpus.split_whitespace() {
        *freqs.entry(w).or_insert(0) += 1;
    }
    let noun_freqs: Vec<u64> = TOPICS
        .iter()
        .flat_map(|t| t.nouns.iter().map(|n| freqs.get(n).copied().unwrap_or(0)))
        .collect();
    println!(
        "corpus: {} sentences, {tokens} tokens, {} distinct words",
        sentences.len(),
        freqs.len()
    );
    println!(
        "nouns: {} (freq min {} / max {})",
        noun_freqs.len(),
        noun_freqs.iter().min().unwrap(),
        noun_freqs.iter().max().unwrap()
    );
    println!("triples: {} attested over {} verbs", triples.len(), VERBS.len());
    for spec in VERBS.iter().take(3) {
        let total: u64 = triples
            .iter()
            .filter(|((_, v, _), _)| v == spec.verb)
            .map(|(_, c)| c)
            .sum();
        println!("  e.g. '{}' corpus frequency {total}", spec.verb);
    }
}
