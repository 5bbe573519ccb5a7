//! Acceptance gate: prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chatprofiler::config::{InterviewConfig, RatingQuestions};
use chatprofiler::evidence::{
    breaching_segments, cluster_segments, embed_segment, extract_for_flag,
};
use chatprofiler::metrics::{Metric, MetricVector};
use chatprofiler::pipeline::{self, Output};
use chatprofiler::profile::profile_corpus;
use chatprofiler::resources::Resources;
use chatprofiler::segment::Segment;
use chatprofiler::transcript::{parse_corpus, write_corpus, Message, Session};
use chatprofiler::{emit_html, emit_json, GuidelineCatalog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use regex::Regex;

const FREQUENCY_TSV: &str = include_str!("../../core/resources/frequency.tsv");
const EMPATHY_TXT: &str = include_str!("../../core/resources/empathy.txt");

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

fn load_demo() -> (Vec<Session>, InterviewConfig) {
    let file = std::fs::File::open(demo_dir().join("transcripts.jsonl")).unwrap();
    let corpus = parse_corpus(std::io::BufReader::new(file)).unwrap();
    let cfg = InterviewConfig::load(&demo_dir().join("interview.json")).unwrap();
    (corpus, cfg)
}

// ---------------------------------------------------------------------------
// Criterion 1: formula oracles
// ---------------------------------------------------------------------------

/// Reference tokenizer, written independently as a regex.
struct OracleTokenizer(Regex);

impl OracleTokenizer {
    fn new() -> Self {
        Self(
            Regex::new(r"[\p{Alphabetic}\p{N}]+(?:['\u{2019}\-.@_][\p{Alphabetic}\p{N}]+)*")
                .unwrap(),
        )
    }

    fn tokens(&self, text: &str) -> Vec<String> {
        self.0
            .find_iter(text)
            .map(|m| {
                m.as_str()
                    .chars()
                    .flat_map(char::to_lowercase)
                    .map(|c| if c == '\u{2019}' { '\'' } else { c })
                    .collect()
            })
            .collect()
    }
}

struct OracleFrequency {
    counts: HashMap<String, u64>,
    total: u64,
    min_s: f64,
    max_s: f64,
}

impl OracleFrequency {
    fn load() -> Self {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for line in FREQUENCY_TSV
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        {
            let (w, c) = line.split_once('\t').unwrap();
            *counts.entry(w.trim().to_lowercase()).or_default() += c.trim().parse::<u64>().unwrap();
        }
        let total: u64 = counts.values().sum();
        let s = |c: u64| -(c as f64 / total as f64).log2();
        let max_c = *counts.values().max().unwrap();
        let min_c = *counts.values().min().unwrap();
        Self {
            min_s: s(max_c),
            max_s: s(min_c),
            counts,
            total,
        }
    }

    fn normalized(&self, w: &str) -> f64 {
        match self.counts.get(w) {
            None => 1.0,
            Some(&c) => {
                (-(c as f64 / self.total as f64).log2() - self.min_s) / (self.max_s - self.min_s)
            }
        }
    }
}

fn luhn_check_digit(payload: &[u32]) -> u32 {
    let sum: u32 = payload
        .iter()
        .rev()
        .enumerate()
        .map(|(i, &d)| {
            if i % 2 == 0 {
                let x = d * 2;
                if x > 9 {
                    x - 9
                } else {
                    x
                }
            } else {
                d
            }
        })
        .sum();
    (10 - sum % 10) % 10
}

/// A PII string of a random kind.
fn random_pii(rng: &mut ChaCha8Rng) -> String {
    let digits = |rng: &mut ChaCha8Rng, n: usize| -> String {
        (0..n)
            .map(|_| char::from(b'0' + rng.random_range(0..10u8)))
            .collect()
    };
    match rng.random_range(0..4) {
        0 => format!("{}-{}-{}", digits(rng, 3), digits(rng, 2), digits(rng, 4)),
        1 => {
            let mut payload: Vec<u32> = vec![4];
            payload.extend((0..14).map(|_| rng.random_range(0..10)));
            let check = luhn_check_digit(&payload);
            payload.push(check);
            payload
                .iter()
                .map(|d| char::from_digit(*d, 10).unwrap())
                .collect()
        }
        2 => format!("{}-{}-{}", digits(rng, 3), digits(rng, 3), digits(rng, 4)),
        _ => format!("user{}@example.com", digits(rng, 3)),
    }
}

const WORDS: &[&str] = &[
    "the",
    "i",
    "you",
    "feel",
    "sorry",
    "glad",
    "really",
    "great",
    "understand",
    "thank",
    "pandemic",
    "work",
    "home",
    "family",
    "what",
    "do",
    "is",
    "that",
    "hear",
    "to",
    "it",
    "so",
    "happy",
    "sad",
    "worried",
    "chatbot",
    "question",
    "don't",
    "it's",
    "well",
    "good",
    "bad",
    "hope",
    "care",
];
const PUNCT: &[&str] = &[",", "!", "?", "...", " - ", ";", "."];

fn random_text(rng: &mut ChaCha8Rng, max_words: usize, vocab: &[&str]) -> String {
    let n = rng.random_range(0..=max_words);
    let mut out = String::new();
    for _ in 0..n {
        let roll = rng.random_range(0..10);
        let word = if roll < 8 {
            vocab[rng.random_range(0..vocab.len())].to_string()
        } else {
            // out of vocabulary
            (0..rng.random_range(3..8))
                .map(|_| ['q', 'x', 'z', 'j'][rng.random_range(0..4)])
                .collect()
        };
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&word);
        if rng.random_range(0..5) == 0 {
            out.push_str(PUNCT[rng.random_range(0..PUNCT.len())]);
        }
    }
    out
}

/// A user message and the number of PII entities planted in it. Entities
/// are always separated by plain words so no detector can span two.
fn random_user_text(rng: &mut ChaCha8Rng) -> (String, usize) {
    let mut parts = vec![random_text(rng, 4, WORDS), "word".to_string()];
    let mut planted = 0;
    for _ in 0..rng.random_range(0..3) {
        parts.push(random_pii(rng));
        parts.push("and".into());
        planted += 1;
    }
    parts.push(random_text(rng, 4, WORDS));
    (parts.join(" "), planted)
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let res = Resources::bundled();
    let tok = OracleTokenizer::new();
    let freq = OracleFrequency::load();
    let empathy: HashSet<String> = EMPATHY_TXT
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect();
    // a small vocabulary so bot bi-grams repeat often
    let bot_vocab = &WORDS[..8];

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let mut messages = Vec::new();
        let mut planted = 0;
        let mut t = 0.0;
        for _ in 0..rng.random_range(0..6) {
            t += rng.random_range(0.0..30.0);
            if rng.random_bool(0.5) {
                messages.push(Message::bot(random_text(&mut rng, 10, bot_vocab), t));
            } else {
                let (text, n) = random_user_text(&mut rng);
                planted += n;
                messages.push(Message::user(text, t));
            }
        }
        let seg = Segment {
            question_id: 1,
            messages,
            advanced: false,
        };
        let got = MetricVector::compute(&seg, &res);

        let user_tokens: Vec<String> = seg
            .user_messages()
            .flat_map(|m| tok.tokens(&m.text))
            .collect();
        let info: f64 = user_tokens.iter().map(|w| freq.normalized(w)).sum();

        let bot_tokens: Vec<String> = seg
            .bot_messages()
            .flat_map(|m| tok.tokens(&m.text))
            .collect();
        let empathic = bot_tokens.iter().filter(|w| empathy.contains(*w)).count();
        let emp = if bot_tokens.is_empty() {
            0.0
        } else {
            empathic as f64 / bot_tokens.len() as f64
        };

        let bigrams: Vec<(String, String)> = seg
            .bot_messages()
            .flat_map(|m| {
                let t = tok.tokens(&m.text);
                t.windows(2)
                    .map(|w| (w[0].clone(), w[1].clone()))
                    .collect::<Vec<_>>()
            })
            .collect();
        let repeats = (0..bigrams.len())
            .filter(|&j| bigrams[..j].contains(&bigrams[j]))
            .count();
        let rep = if bigrams.is_empty() {
            0.0
        } else {
            repeats as f64 / bigrams.len() as f64
        };

        let priv_rate = if user_tokens.is_empty() {
            0.0
        } else {
            planted as f64 / user_tokens.len() as f64
        };

        for (name, a, b) in [
            ("informativeness", got.informativeness, info),
            ("empathy", got.empathy_level, emp),
            ("repetition", got.repetition_rate, rep),
            ("privacy", got.privacy_intrusion_rate, priv_rate),
        ] {
            let err = (a - b).abs();
            ensure!(err <= 1e-12, "case {case}: {name} {a} vs oracle {b}");
            worst = worst.max(err);
        }
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("1000 segments, max abs error {worst:.1e}"))
}

// ---------------------------------------------------------------------------
// Criterion 2: completion-rate fixture
// ---------------------------------------------------------------------------

const Q1: &str = "How are you feeling today?";
const Q2: &str = "Where are you located?";
const Q3: &str = "What do you do outside work?";
const Q4: &str = "How satisfied are you with this chat? Please rate it from 1 to 5.";

fn fixture_config() -> InterviewConfig {
    let mut cfg = InterviewConfig::from_questions(&[Q1, Q2, Q3, Q4]);
    cfg.rating_question_ids = Some(RatingQuestions {
        satisfaction: Some(4),
        trust: None,
        rationale: vec![],
    });
    cfg
}

/// `answered` questions are asked and answered in order; `asked_only` is
/// asked afterwards without an answer.
fn scripted(id: &str, answered: &[&str], asked_only: Option<&str>) -> Session {
    let mut messages = Vec::new();
    let mut t = 0.0;
    for q in answered {
        messages.push(Message::bot(*q, t));
        let reply = if *q == Q4 {
            "4"
        } else {
            "Pretty good, thanks for asking."
        };
        messages.push(Message::user(reply, t + 20.0));
        t += 40.0;
    }
    if let Some(q) = asked_only {
        messages.push(Message::bot(q, t));
    }
    Session::new(id, messages)
}

fn completion_fixture() -> Vec<Session> {
    let full = [Q1, Q2, Q3, Q4];
    vec![
        scripted("s01", &full, None),
        scripted("s02", &full, None),
        scripted("s03", &full, None),
        scripted("s04", &full, None),
        scripted("s05", &full, None),
        scripted("s06", &[Q1, Q2, Q3], None),
        scripted("s07", &[Q1, Q2], None),
        scripted("s08", &[Q1, Q2], None),
        scripted("s09", &[Q1], None),
        scripted("s10", &[], Some(Q1)),
    ]
}

fn criterion_2() -> Outcome {
    let cfg = fixture_config();
    let corpus = completion_fixture();
    let p = profile_corpus(&corpus, &cfg, &Resources::bundled())
        .map_err(|e| e.to_string())?
        .profile;
    let rates: Vec<(u32, usize, usize, Option<f64>)> = p
        .per_question
        .iter()
        .map(|q| {
            (
                q.question_id,
                q.n_completed,
                q.n_responded,
                q.completion_rate,
            )
        })
        .collect();
    // Q1 is measured against all ten participants
    let expected = vec![
        (1, 8, 9, Some(0.8)),
        (2, 6, 8, Some(0.75)),
        (3, 5, 6, Some(5.0 / 6.0)),
    ];
    ensure!(
        rates == expected,
        "per-question {rates:?}, expected {expected:?}"
    );
    ensure!(
        p.interview.completion_rate == 0.5,
        "interview completion {} != 5/10",
        p.interview.completion_rate
    );
    Ok("Q1 8/10, Q2 6/8 = 0.75, Q3 5/6, interview 5/10".into())
}

// ---------------------------------------------------------------------------
// Criterion 3: threshold semantics
// ---------------------------------------------------------------------------

fn criterion_3() -> Outcome {
    let res = Resources::bundled();
    let catalog = GuidelineCatalog::bundled();

    let (demo, demo_cfg) = load_demo();
    let fixture_cfg = fixture_config();
    let fixture = completion_fixture();
    for (name, corpus, cfg) in [
        ("demo", &demo, &demo_cfg),
        ("fixture", &fixture, &fixture_cfg),
    ] {
        let p = profile_corpus(corpus, cfg, &res)
            .map_err(|e| e.to_string())?
            .profile;
        let q1: Vec<_> = p
            .flags
            .iter()
            .filter(|f| f.question_id == 1 && f.metric != Metric::HateSpeechRate)
            .collect();
        ensure!(q1.is_empty(), "{name}: Q1 flagged {q1:?}");
    }

    let clean = pipeline::run(
        &fixture,
        &fixture_cfg,
        &res,
        &catalog,
        Output::Suggestions,
        vec![],
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        !clean
            .profile
            .flags
            .iter()
            .any(|f| f.metric == Metric::HateSpeechRate),
        "clean corpus already has a hate flag"
    );

    let mut tainted = fixture.clone();
    let session = &mut tainted[2];
    ensure!(
        session.messages[2].is_bot() && session.messages[2].text == Q2,
        "fixture layout changed"
    );
    let t = session.messages[2].timestamp;
    session
        .messages
        .insert(3, Message::bot("Answer it, idiot.", t + 1.0));
    let doc = pipeline::run(
        &tainted,
        &fixture_cfg,
        &res,
        &catalog,
        Output::Suggestions,
        vec![],
    )
    .map_err(|e| e.to_string())?;
    let hate: Vec<_> = doc
        .profile
        .flags
        .iter()
        .filter(|f| f.metric == Metric::HateSpeechRate)
        .collect();
    ensure!(
        hate.len() == 1 && hate[0].question_id == 2,
        "hate flags {hate:?}"
    );
    ensure!(
        hate[0].threshold == 0.0,
        "hate threshold {}",
        hate[0].threshold
    );
    let texts: Vec<&str> = doc
        .suggestions
        .as_ref()
        .unwrap()
        .iter()
        .filter(|s| s.metric == Metric::HateSpeechRate)
        .map(|s| s.sentence.as_str())
        .collect();
    let expected = format!(
        "For question '{Q2}', remove all the hate or offensive speech because metric hate speech rate is too high."
    );
    ensure!(texts == [expected.as_str()], "hate suggestions {texts:?}");
    Ok(
        "no Q1 flags on two corpora; one offensive token yields the hate flag and its guideline"
            .into(),
    )
}

// ---------------------------------------------------------------------------
// Criterion 4: template fidelity
// ---------------------------------------------------------------------------

/// The design guideline table, written out independently of the catalog file.
fn guideline_table() -> BTreeMap<Metric, BTreeSet<&'static str>> {
    let rows: [(&str, &[Metric]); 10] = [
        (
            "Add polite probings and explanations to the question",
            &[Metric::Informativeness, Metric::CompletionRate],
        ),
        (
            "Add customizations to show the chatbot is actively listening",
            &[Metric::Informativeness, Metric::EngagementDuration],
        ),
        (
            "Set a minimum response length to handle short user input",
            &[Metric::ResponseLength, Metric::EngagementDuration],
        ),
        (
            "Add customized chatbot responses to handle user digressions",
            &[
                Metric::ResponseLength,
                Metric::EngagementDuration,
                Metric::RepetitionRate,
            ],
        ),
        (
            "Reword the question to make it more acceptable to users",
            &[Metric::CompletionRate, Metric::RepetitionRate],
        ),
        (
            "Personalize the chat experience, e.g., addressing users their names",
            &[Metric::CompletionRate],
        ),
        (
            "Add default empathetic chatbot responses to handle unknown user input",
            &[Metric::EmpathyLevel],
        ),
        (
            "Customize chatbot responses to give empathetic feedback on user input",
            &[Metric::EmpathyLevel],
        ),
        (
            "Remove all the hate or offensive speech",
            &[Metric::HateSpeechRate],
        ),
        (
            "Avoid asking private or sensitive information without user consent",
            &[Metric::PrivacyIntrusionRate],
        ),
    ];
    let mut table: BTreeMap<Metric, BTreeSet<&str>> = BTreeMap::new();
    for (text, metrics) in rows {
        for m in metrics {
            table.entry(*m).or_default().insert(text);
        }
    }
    table
}

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_lowercase().chain(c).collect())
        .unwrap_or_default()
}

fn criterion_4() -> Outcome {
    let res = Resources::bundled();
    let catalog = GuidelineCatalog::bundled();

    // Q2 re-asked in half the sessions, never Q1
    let cfg = fixture_config();
    let mut corpus = completion_fixture();
    for s in corpus.iter_mut().take(5) {
        let i = s.messages.iter().position(|m| m.text == Q2).unwrap();
        let t = s.messages[i].timestamp;
        s.messages.insert(i + 1, Message::user("Why?", t + 1.0));
        s.messages.insert(i + 2, Message::bot(Q2, t + 2.0));
    }
    let doc = pipeline::run(&corpus, &cfg, &res, &catalog, Output::Suggestions, vec![])
        .map_err(|e| e.to_string())?;
    let suggestions = doc.suggestions.as_ref().unwrap();
    let expected = "For question 'Where are you located?', reword the question to make it more acceptable to users because metric repetition rate is too high.";
    let rep: Vec<&str> = suggestions
        .iter()
        .filter(|s| s.question_id == 2 && s.metric == Metric::RepetitionRate)
        .map(|s| s.sentence.as_str())
        .collect();
    ensure!(rep.contains(&expected), "Q2 repetition sentences {rep:?}");

    let table = guideline_table();
    let (demo, demo_cfg) = load_demo();
    let demo_doc = pipeline::run(
        &demo,
        &demo_cfg,
        &res,
        &catalog,
        Output::Suggestions,
        vec![],
    )
    .map_err(|e| e.to_string())?;
    let mut checked = 0;
    for d in [&doc, &demo_doc] {
        let all = d.suggestions.as_ref().unwrap();
        for f in &d.profile.flags {
            let question = &d.profile.per_question[f.question_id as usize - 1].question_text;
            let z = if Metric::HateSpeechRate == f.metric
                || f.direction == chatprofiler::profile::Direction::Above
            {
                "too high"
            } else {
                "too low"
            };
            let got: BTreeSet<&str> = all
                .iter()
                .filter(|s| s.question_id == f.question_id && s.metric == f.metric)
                .map(|s| s.sentence.as_str())
                .collect();
            let want: BTreeSet<String> = table[&f.metric]
                .iter()
                .map(|g| {
                    format!(
                        "For question '{question}', {} because metric {} is {z}.",
                        lower_first(g),
                        f.metric.display_name().to_lowercase()
                    )
                })
                .collect();
            let want: BTreeSet<&str> = want.iter().map(String::as_str).collect();
            ensure!(
                got == want,
                "Q{} {}: {got:?} != {want:?}",
                f.question_id,
                f.metric
            );
            checked += 1;
        }
    }
    Ok(format!(
        "Q2 repetition sentence byte-equal; {checked} flags map to exactly their guidelines"
    ))
}

// ---------------------------------------------------------------------------
// Criterion 5: evidence fixture
// ---------------------------------------------------------------------------

const PANDEMIC_REPLIES: [&str; 6] = [
    "the pandemic and the covid lockdown make me worried",
    "covid and the virus quarantine make me scared",
    "the lockdown and the pandemic virus are stressful",
    "worried about covid and the quarantine lockdown",
    "the virus pandemic and the vaccine make me worried",
    "scared of covid during the lockdown quarantine",
];
const HOBBY_REPLIES: [&str; 2] = [
    "playing guitar and music and painting",
    "painting with music and guitar and yoga",
];

fn evidence_fixture() -> (Vec<Session>, InterviewConfig) {
    let cfg = InterviewConfig::from_questions(&[Q1, Q2, Q3]);
    let mut corpus = Vec::new();
    for i in 0..20 {
        let mut m = vec![
            Message::bot(Q1, 0.0),
            Message::user("Fine, thank you.", 10.0),
            Message::bot(Q2, 20.0),
        ];
        if i < 8 {
            // the bot repeats itself before the user answers
            m.push(Message::user("hmm", 25.0));
            m.push(Message::bot(Q2, 30.0));
            let reply = if i < 6 {
                PANDEMIC_REPLIES[i]
            } else {
                HOBBY_REPLIES[i - 6]
            };
            m.push(Message::user(reply, 40.0));
        } else {
            m.push(Message::user("Boston", 40.0));
        }
        m.push(Message::bot(Q3, 50.0));
        m.push(Message::user("Reading.", 60.0));
        corpus.push(Session::new(format!("s{i:02}"), m));
    }
    (corpus, cfg)
}

fn criterion_5() -> Outcome {
    let res = Resources::bundled();
    let (corpus, cfg) = evidence_fixture();
    let run = profile_corpus(&corpus, &cfg, &res).map_err(|e| e.to_string())?;
    let flag = run
        .profile
        .flags
        .iter()
        .find(|f| f.question_id == 2 && f.metric == Metric::RepetitionRate)
        .ok_or("no Q2 repetition flag")?;
    let chosen = breaching_segments(flag, &run.segments, &run.profile.thresholds);
    ensure!(chosen.len() == 8, "{} breaching segments", chosen.len());
    let vectors: Vec<Vec<f64>> = chosen
        .iter()
        .map(|s| embed_segment(s, &res.embeddings).vector)
        .collect();
    let clustering = cluster_segments(&vectors, cfg.rng_seed);
    ensure!(clustering.k == 2, "k = {}", clustering.k);

    let first = extract_for_flag(
        flag,
        &run.segments,
        &run.profile.thresholds,
        &res.embeddings,
        2,
        cfg.rng_seed,
    );
    let coverage: Vec<String> = first
        .clusters
        .iter()
        .map(|c| format!("{:.1}%", c.coverage_frac * 100.0))
        .collect();
    ensure!(coverage == ["75.0%", "25.0%"], "coverage {coverage:?}");
    let big = &first.clusters[0].representative.session_id;
    ensure!(
        big.as_str() < "s06",
        "largest cluster shown by {big}, not a pandemic reply"
    );
    for _ in 0..10 {
        let again = extract_for_flag(
            flag,
            &run.segments,
            &run.profile.thresholds,
            &res.embeddings,
            2,
            cfg.rng_seed,
        );
        ensure!(again == first, "evidence differs between runs");
    }
    Ok("k = 2, coverages 75.0% and 25.0%, identical over 10 runs".into())
}

// ---------------------------------------------------------------------------
// Criterion 6: clustering sanity
// ---------------------------------------------------------------------------

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Optimal 2-partition by exhaustive search over all 2^(n-1) splits.
fn brute_two_partition(points: &[Vec<f64>]) -> Vec<usize> {
    let n = points.len();
    let mut best = (f64::INFINITY, 0u32);
    for mask in 1u32..(1 << (n - 1)) {
        let mut cost = 0.0;
        for side in [0, 1] {
            let members: Vec<&Vec<f64>> = (0..n)
                .filter(|&i| (mask >> i) & 1 == side)
                .map(|i| &points[i])
                .collect();
            let mean: Vec<f64> = (0..points[0].len())
                .map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64)
                .collect();
            cost += members.iter().map(|p| sq_dist(p, &mean)).sum::<f64>();
        }
        if cost < best.0 {
            best = (cost, mask);
        }
    }
    (0..n).map(|i| ((best.1 >> i) & 1) as usize).collect()
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let points: Vec<Vec<f64>> = (0..20)
        .map(|i| {
            let base = if i < 10 { [1.0, 0.0] } else { [0.0, 1.0] };
            vec![
                base[0] + noise.sample(&mut rng),
                base[1] + noise.sample(&mut rng),
            ]
        })
        .collect();
    let c = cluster_segments(&points, 0);
    ensure!(c.k == 2, "elbow chose k = {}", c.k);
    let normalized: Vec<Vec<f64>> = points.iter().map(|p| unit(p)).collect();
    let brute = brute_two_partition(&normalized);
    ensure!(
        same_partition(&c.assignments, &brute),
        "assignment differs from the optimal 2-partition"
    );
    ensure!(c.wcss.len() == 10, "{} candidate k values", c.wcss.len());
    ensure!(
        c.wcss.windows(2).all(|w| w[1] <= w[0] + 1e-12),
        "WCSS increases: {:?}",
        c.wcss
    );
    Ok("k = 2, optimal partition, WCSS non-increasing over k = 1..10".into())
}

// ---------------------------------------------------------------------------
// Criterion 7: end-to-end determinism
// ---------------------------------------------------------------------------

fn run_report(out: &Path) -> Result<Duration, String> {
    let started = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_chatprofiler"))
        .arg("report")
        .arg("--transcripts")
        .arg(demo_dir().join("transcripts.jsonl"))
        .arg("--interview")
        .arg(demo_dir().join("interview.json"))
        .arg("--out-json")
        .arg(out.join("profile.json"))
        .arg("--out-html")
        .arg(out.join("profile.html"))
        .env_remove("CHATPROFILER_RESOURCES")
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        status.status.success(),
        "exit {:?}: {}",
        status.status,
        String::from_utf8_lossy(&status.stderr)
    );
    Ok(started.elapsed())
}

fn criterion_7() -> Outcome {
    let (corpus, cfg) = load_demo();
    ensure!(corpus.len() >= 50, "demo has {} sessions", corpus.len());
    ensure!(
        cfg.interview_questions().count() == 5,
        "demo has {} interview questions",
        cfg.interview_questions().count()
    );

    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t1 = run_report(a.path())?;
    let t2 = run_report(b.path())?;
    for f in ["profile.json", "profile.html"] {
        let x = std::fs::read(a.path().join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(f)).map_err(|e| e.to_string())?;
        ensure!(!x.is_empty() && x == y, "{f} differs between runs");
    }
    let slowest = t1.max(t2);
    ensure!(slowest < Duration::from_secs(5), "a run took {slowest:?}");
    Ok(format!(
        "{} sessions, identical JSON and HTML, slowest run {:.2}s",
        corpus.len(),
        slowest.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// Criterion 8: property fuzzing
// ---------------------------------------------------------------------------

fn fuzz_text(rng: &mut ChaCha8Rng, questions: &[&str]) -> String {
    match rng.random_range(0..8) {
        0 => String::new(),
        1 => (0..rng.random_range(1..30))
            .map(|_| rng.random::<char>())
            .collect(),
        2 => (0..rng.random_range(1..6))
            .map(|_| "zqxvj")
            .collect::<Vec<_>>()
            .join(" "),
        3 => random_pii(rng),
        4 => format!(
            "{} {}",
            questions[rng.random_range(0..questions.len())],
            rng.random::<char>()
        ),
        5 => "idiot, shut up".into(),
        _ => questions[rng.random_range(0..questions.len())].to_string(),
    }
}

fn fuzz_corpus(rng: &mut ChaCha8Rng, sessions: usize) -> Vec<Session> {
    let questions = [Q1, Q2, Q3, Q4, "sorry sorry, I understand", "ok ok ok ok"];
    (0..sessions)
        .map(|i| {
            let mut t = rng.random_range(0.0..1e6);
            let mut messages = Vec::new();
            if rng.random_bool(0.9) {
                messages.push(Message::bot(Q1, t));
            }
            for _ in 0..rng.random_range(0..14) {
                t += rng.random_range(0.0..120.0);
                let text = fuzz_text(rng, &questions);
                messages.push(if rng.random_bool(0.5) {
                    Message::bot(text, t)
                } else {
                    Message::user(text, t)
                });
            }
            let mut s = Session::new(format!("f{i:02}"), messages);
            if rng.random_bool(0.3) {
                s.satisfaction_rating = Some(rng.random_range(1..=5));
            }
            if rng.random_bool(0.3) {
                s.feedback_texts.push(fuzz_text(rng, &questions));
            }
            s
        })
        .collect()
}

fn check_bounds(doc: &chatprofiler::ReportDocument) -> Result<(), String> {
    for q in &doc.profile.per_question {
        for m in Metric::ALL {
            if let Some(v) = q.value(m) {
                ensure!(v.is_finite() && v >= 0.0, "Q{} {m} = {v}", q.question_id);
                ensure!(
                    !m.is_rate() || v <= 1.0,
                    "Q{} {m} = {v} exceeds 1",
                    q.question_id
                );
            }
        }
        if let Some(sd) = &q.sd {
            ensure!(
                sd.values().all(|v| v.is_finite() && v >= 0.0),
                "Q{} bad sd",
                q.question_id
            );
        }
    }
    let i = &doc.profile.interview;
    ensure!(
        (0.0..=1.0).contains(&i.completion_rate),
        "interview completion {}",
        i.completion_rate
    );
    let s = &i.sentiment;
    for v in [s.positive_frac, s.neutral_frac, s.negative_frac] {
        ensure!((0.0..=1.0).contains(&v), "sentiment fraction {v}");
    }
    for sug in doc.suggestions.iter().flatten() {
        let total: f64 = sug.evidence.clusters.iter().map(|c| c.coverage_frac).sum();
        ensure!(total <= 1.0 + 1e-12, "coverage sums to {total}");
        ensure!(
            sug.evidence.clusters.len() <= doc.config.max_evidence_per_suggestion,
            "too many clusters"
        );
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let res = Resources::bundled();
    let catalog = GuidelineCatalog::bundled();
    let cfg = fixture_config();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut transcripts = 0;
    let mut rejected = 0;
    for _ in 0..1000 {
        let corpus = fuzz_corpus(&mut rng, 10);
        transcripts += corpus.len();
        // through the wire format, so the parser sees the same bytes a file would hold
        let mut wire = Vec::new();
        write_corpus(&corpus, &mut wire).map_err(|e| e.to_string())?;
        let parsed = parse_corpus(wire.as_slice()).map_err(|e| e.to_string())?;

        let run = profile_corpus(&parsed, &cfg, &res);
        let Ok(run) = run else {
            // a corpus that never reaches the opening question has no thresholds
            rejected += 1;
            continue;
        };
        for s in &run.segments {
            for m in Metric::ALL {
                if let Some(v) = s.value(m) {
                    ensure!(
                        v.is_finite() && v >= 0.0 && (!m.is_rate() || v <= 1.0),
                        "segment {m} = {v}"
                    );
                }
            }
        }
        let doc = pipeline::run(&parsed, &cfg, &res, &catalog, Output::Suggestions, vec![])
            .map_err(|e| e.to_string())?;
        check_bounds(&doc)?;
        emit_json(&doc).map_err(|e| e.to_string())?;
        emit_html(&doc);
    }
    ensure!(rejected < 100, "{rejected} corpora rejected");
    Ok(format!(
        "{transcripts} transcripts, {rejected} corpora without an opening question"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "formula oracles", criterion_1),
        (2, "completion rate fixture", criterion_2),
        (3, "threshold semantics", criterion_3),
        (4, "template fidelity", criterion_4),
        (5, "evidence pipeline fixture", criterion_5),
        (6, "clustering sanity", criterion_6),
        (7, "end-to-end determinism", criterion_7),
        (8, "property fuzzing", criterion_8),
    ];
    let mut failures = 0;
    for (n, name, check) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} {name}: PASS ({detail}; {secs:.2}s)"),
            Err(why) => {
                failures += 1;
                println!("criterion {n} {name}: FAIL ({why}; {secs:.2}s)");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
