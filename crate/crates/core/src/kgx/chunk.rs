use super::KgxError;

pub const DEFAULT_CHUNK_SIZE: usize = 1000;
pub const DEFAULT_OVERLAP: usize = 100;

/// Character-offset chunk boundaries for one text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPlan {
    pub chunk_size: usize,
    pub overlap: usize,
    /// Half-open `[start, end)` character offsets.
    pub boundaries: Vec<(usize, usize)>,
}

impl ChunkPlan {
    /// Borrow each chunk from the text the plan was built for.
    pub fn chunks<'a>(&self, text: &'a str) -> Vec<&'a str> {
        let mut byte_at: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
        byte_at.push(text.len());
        self.boundaries
            .iter()
            .map(|&(s, e)| &text[byte_at[s]..byte_at[e]])
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Break {
    Word,
    Sentence,
    Paragraph,
}

fn break_kind(chars: &[char], end: usize) -> Option<Break> {
    let last = chars[end - 1];
    if end >= 2 && last == '\n' && chars[end - 2] == '\n' {
        Some(Break::Paragraph)
    } else if end >= 2 && last.is_whitespace() && matches!(chars[end - 2], '.' | '!' | '?') {
        Some(Break::Sentence)
    } else if last.is_whitespace() {
        Some(Break::Word)
    } else {
        None
    }
}

/// Latest end offset in `[lo, hi]` that falls just after the strongest
/// available separator.
fn find_break(chars: &[char], lo: usize, hi: usize) -> Option<usize> {
    let mut best: Option<(Break, usize)> = None;
    for end in (lo.max(1)..=hi).rev() {
        if let Some(kind) = break_kind(chars, end) {
            if best.is_none_or(|(b, _)| kind > b) {
                best = Some((kind, end));
                if kind == Break::Paragraph {
                    break;
                }
            }
        }
    }
    best.map(|(_, end)| end)
}

/// Split `text` into windows of at most `chunk_size` characters.
///
/// Each window ends after the last paragraph break it contains, else the last
/// sentence end, else the last whitespace, else at the hard limit. The next
/// window starts `overlap` characters before the previous end, so neighbours
/// share exactly `overlap` characters.
pub fn chunk_text(text: &str, chunk_size: usize, overlap: usize) -> Result<ChunkPlan, KgxError> {
    if chunk_size == 0 || overlap >= chunk_size {
        return Err(KgxError::InvalidChunking { chunk_size, overlap });
    }
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut boundaries = Vec::new();
    let mut start = 0;
    while start < n {
        if n - start <= chunk_size {
            boundaries.push((start, n));
            break;
        }
        let hard_end = start + chunk_size;
        // An end at or below start + overlap would not advance the window.
        let end = find_break(&chars, start + overlap + 1, hard_end).unwrap_or(hard_end);
        boundaries.push((start, end));
        start = end - overlap;
    }
    Ok(ChunkPlan {
        chunk_size,
        overlap,
        boundaries,
    })
}
