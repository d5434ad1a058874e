use std::collections::{BTreeSet, HashMap};

pub const TRIM_HEAD: usize = 300;
pub const TRIM_TAIL: usize = 2000;
pub const DEFAULT_MIN_NGRAM: usize = 5;

/// Drop the title block and the reference list: the first 300 and last
/// 2000 characters.
pub fn trim_for_reuse(text: &str) -> String {
    let n = text.chars().count();
    if n <= TRIM_HEAD + TRIM_TAIL {
        return String::new();
    }
    text.chars().skip(TRIM_HEAD).take(n - TRIM_HEAD - TRIM_TAIL).collect()
}

/// A merged shared segment. Spans are char offsets `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReuseMatch {
    pub span_a: (usize, usize),
    pub span_b: (usize, usize),
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReuseResult {
    pub score: usize,
    pub matches: Vec<ReuseMatch>,
}

struct Word {
    norm: String,
    start: usize,
    end: usize,
}

fn words(text: &str) -> Vec<Word> {
    let mut out = Vec::new();
    let mut current: Option<(usize, String)> = None;
    let mut pos = 0;
    for (i, c) in text.chars().enumerate() {
        pos = i + 1;
        if c.is_alphanumeric() {
            current.get_or_insert_with(|| (i, String::new())).1.extend(c.to_lowercase());
        } else if let Some((start, norm)) = current.take() {
            out.push(Word { norm, start, end: i });
        }
    }
    if let Some((start, norm)) = current {
        out.push(Word { norm, start, end: pos });
    }
    out
}

/// Maximal diagonal run: `len` words starting at `a` in A and `b` in B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Run {
    a: usize,
    b: usize,
    len: usize,
}

fn find_runs(wa: &[Word], wb: &[Word], n: usize) -> BTreeSet<Run> {
    let mut runs = BTreeSet::new();
    if n == 0 || wa.len() < n || wb.len() < n {
        return runs;
    }
    let mut index: HashMap<Vec<&str>, Vec<usize>> = HashMap::new();
    for i in 0..=wa.len() - n {
        let key: Vec<&str> = wa[i..i + n].iter().map(|w| w.norm.as_str()).collect();
        index.entry(key).or_default().push(i);
    }
    let eq = |i: usize, j: usize| wa[i].norm == wb[j].norm;
    for j in 0..=wb.len() - n {
        let key: Vec<&str> = wb[j..j + n].iter().map(|w| w.norm.as_str()).collect();
        let Some(hits) = index.get(&key) else { continue };
        for &i in hits {
            // Only start from the left end of a run; inner seeds extend to
            // the same run.
            if i > 0 && j > 0 && eq(i - 1, j - 1) {
                continue;
            }
            let mut len = n;
            while i + len < wa.len() && j + len < wb.len() && eq(i + len, j + len) {
                len += 1;
            }
            runs.insert(Run { a: i, b: j, len });
        }
    }
    runs
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn overlaps(x: (usize, usize), y: (usize, usize)) -> bool {
    x.0 < y.1 && y.0 < x.1
}

/// Count shared word runs of at least `min_ngram` words. Runs overlapping
/// in either document are merged into one segment; the score is the number
/// of merged segments.
pub fn text_reuse_score(a: &str, b: &str, min_ngram: usize) -> ReuseResult {
    let (wa, wb) = (words(a), words(b));
    let runs: Vec<Run> = find_runs(&wa, &wb, min_ngram).into_iter().collect();
    let mut parent: Vec<usize> = (0..runs.len()).collect();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let (x, y) = (runs[i], runs[j]);
            if overlaps((x.a, x.a + x.len), (y.a, y.a + y.len)) || overlaps((x.b, x.b + x.len), (y.b, y.b + y.len)) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let mut groups: HashMap<usize, Vec<Run>> = HashMap::new();
    for (i, r) in runs.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(*r);
    }
    let mut matches: Vec<ReuseMatch> = groups
        .into_values()
        .map(|g| {
            let a0 = g.iter().map(|r| r.a).min().expect("non-empty group");
            let a1 = g.iter().map(|r| r.a + r.len).max().expect("non-empty group");
            let b0 = g.iter().map(|r| r.b).min().expect("non-empty group");
            let b1 = g.iter().map(|r| r.b + r.len).max().expect("non-empty group");
            ReuseMatch {
                span_a: (wa[a0].start, wa[a1 - 1].end),
                span_b: (wb[b0].start, wb[b1 - 1].end),
                length: (a1 - a0).max(b1 - b0),
            }
        })
        .collect();
    matches.sort_by_key(|m| (m.span_a, m.span_b));
    ReuseResult {
        score: matches.len(),
        matches,
    }
}
