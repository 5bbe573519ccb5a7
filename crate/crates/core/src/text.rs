//! Tokenization and fuzzy string matching shared by every metric.

/// Characters that join two alphanumeric runs into one token
/// (`don't`, `123-45-6789`, `jo@example.com`, `3.5`).
fn is_connector(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-' | '.' | '@' | '_')
}

/// Splits `text` into lowercase word tokens.
///
/// A token is a maximal run of alphanumeric characters, possibly joined by
/// single connector characters that sit between two alphanumerics. All
/// other characters separate tokens. Curly apostrophes are folded to `'`.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();

    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
            continue;
        }
        let joins = is_connector(c)
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if joins {
            current.push(if c == '\u{2019}' { '\'' } else { c });
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Lowercases, strips punctuation and collapses whitespace.
pub fn normalize_question(text: &str) -> String {
    let stripped: String = text
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Character-level Levenshtein edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - distance / max_len`; two empty strings are identical.
pub fn levenshtein_similarity(a: &str, b: &str) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / max_len as f64
}

fn sorted_tokens(normalized: &str) -> String {
    let mut words: Vec<&str> = normalized.split(' ').collect();
    words.sort_unstable();
    words.join(" ")
}

/// Similarity between two question texts in `[0, 1]`.
///
/// Both texts are normalized, then scored as the larger of the plain
/// Levenshtein similarity and the Levenshtein similarity of their
/// alphabetically sorted words, so word-order swaps such as
/// "where you are located" / "where are you located" still match.
pub fn question_similarity(a: &str, b: &str) -> f64 {
    normalized_similarity(&normalize_question(a), &normalize_question(b))
}

/// [`question_similarity`] for texts already passed through
/// [`normalize_question`].
pub fn normalized_similarity(a: &str, b: &str) -> f64 {
    let direct = levenshtein_similarity(a, b);
    if direct >= 1.0 {
        return direct;
    }
    direct.max(levenshtein_similarity(&sorted_tokens(a), &sorted_tokens(b)))
}

/// Edit distance if it is at most `limit`. Stops as soon as every cell of
/// a DP row exceeds the limit.
fn bounded_levenshtein(a: &[char], b: &[char], limit: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > limit {
        return None;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        let mut row_min = cur[0];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
            row_min = row_min.min(cur[j + 1]);
        }
        if row_min > limit {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Some(prev[b.len()]).filter(|&d| d <= limit)
}

/// [`normalized_similarity`] when it reaches `threshold`, computed without
/// finishing edit distances that cannot get there.
pub fn similarity_at_least(a: &str, b: &str, threshold: f64) -> Option<f64> {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return Some(1.0);
    }
    let limit = ((1.0 - threshold) * max_len as f64 + 1e-9).floor().max(0.0) as usize;
    let score = |x: &str, y: &str| {
        let x: Vec<char> = x.chars().collect();
        let y: Vec<char> = y.chars().collect();
        bounded_levenshtein(&x, &y, limit).map(|d| 1.0 - d as f64 / max_len as f64)
    };
    let direct = score(a, b);
    let best = if direct == Some(1.0) {
        direct
    } else {
        match (direct, score(&sorted_tokens(a), &sorted_tokens(b))) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        }
    };
    best.filter(|&s| s >= threshold)
}

/// Upper bound on [`normalized_similarity`] from the lengths alone: the edit
/// distance is at least the length difference.
pub fn similarity_bound(a: &str, b: &str) -> f64 {
    let (la, lb) = (a.chars().count(), b.chars().count());
    if la.max(lb) == 0 {
        1.0
    } else {
        la.min(lb) as f64 / la.max(lb) as f64
    }
}
