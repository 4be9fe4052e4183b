//! Line segmentation: cluster OCR characters into lines, enumerate every
//! contiguous run of characters on a line, then inject same-sized blank regions
//! next to (and, for contrastive mining, far from) each run.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ocr::{compute_char_stats, CharBox, CharStats};
use crate::{math, Rect};

/// What a segment's pixels are expected to contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentKind {
    Text,
    /// Blank placed on the source segment's line (`"+"` text).
    Blank,
    /// Blank placed about ten character heights away (`"-"` text).
    HardBlank,
}

/// Merged run of characters (or an injected blank of matching geometry).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSegment {
    pub rect: Rect,
    pub line: usize,
    pub text: String,
    pub kind: SegmentKind,
    pub char_count: usize,
    /// Index of the text segment a blank was derived from.
    pub source: Option<usize>,
}

impl LineSegment {
    pub fn is_blank(&self) -> bool {
        self.kind != SegmentKind::Text
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentConfig {
    /// Vertical clustering tolerance in pixels; `None` derives
    /// `max(2, round(0.25 * mean_char_height))`.
    pub line_tolerance: Option<u32>,
    /// Longest run enumerated per line; `None` enumerates every run.
    pub max_run: Option<usize>,
    /// Restrict `"+"` blanks to the central third of the page and emit `"-"`
    /// hard-negative blanks.
    pub contrastive_mode: bool,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            line_tolerance: None,
            max_run: Some(12),
            contrastive_mode: false,
        }
    }
}

pub fn default_line_tolerance(stats: &CharStats) -> u32 {
    (math::round(0.25 * stats.mean_height) as u32).max(2)
}

/// Group characters into lines.
///
/// Boxes are visited by ascending bottom edge; a box joins the open cluster when
/// both its top and bottom lie within `dy` of the cluster's first box.
pub fn cluster_lines(chars: &[CharBox], dy: u32) -> Vec<Vec<CharBox>> {
    let mut order: Vec<usize> = (0..chars.len()).collect();
    order.sort_by_key(|&i| chars[i].rect.y1());
    let mut lines: Vec<Vec<CharBox>> = Vec::new();
    let mut current: Vec<CharBox> = Vec::new();
    for i in order {
        let b = &chars[i];
        let joins = match current.first() {
            None => true,
            Some(first) => {
                b.rect.y.abs_diff(first.rect.y) <= dy && b.rect.y1().abs_diff(first.rect.y1()) <= dy
            }
        };
        if joins {
            current.push(b.clone());
        } else {
            lines.push(core::mem::take(&mut current));
            current.push(b.clone());
        }
    }
    if !current.is_empty() {
        lines.push(current);
    }
    lines
}

/// Sort a line by horizontal midpoint (stable on ties).
pub fn sort_by_midpoint(line: &mut [CharBox]) {
    line.sort_by_key(|c| 2 * c.rect.x as u64 + c.rect.w as u64);
}

/// Every contiguous run of a midpoint-sorted line, merged into one box.
///
/// A `k`-character line yields `k(k+1)/2` segments when `max_run` is `None`.
pub fn enumerate_segments(line: &[CharBox], line_index: usize, max_run: Option<usize>) -> Vec<LineSegment> {
    let k = line.len();
    let cap = max_run.unwrap_or(k).min(k);
    let mut out = Vec::new();
    for start in 0..k {
        let mut rect = line[start].rect;
        let mut text = String::new();
        for end in start..k.min(start + cap) {
            let c = &line[end];
            if end > start {
                rect = rect.union(&c.rect);
            }
            text.push_str(&c.text);
            out.push(LineSegment {
                rect,
                line: line_index,
                text: text.clone(),
                kind: SegmentKind::Text,
                char_count: end - start + 1,
                source: None,
            });
        }
    }
    out
}

/// Uniform-grid index for positive-area overlap queries.
struct BoxIndex {
    cell: u32,
    cols: u32,
    rows: u32,
    buckets: Vec<Vec<u32>>,
    rects: Vec<Rect>,
}

impl BoxIndex {
    fn new(width: u32, height: u32, cell: u32) -> Self {
        let cols = width.div_ceil(cell).max(1);
        let rows = height.div_ceil(cell).max(1);
        Self {
            cell,
            cols,
            rows,
            buckets: vec![Vec::new(); (cols * rows) as usize],
            rects: Vec::new(),
        }
    }

    fn cells(&self, r: &Rect) -> (u32, u32, u32, u32) {
        let cx0 = (r.x / self.cell).min(self.cols - 1);
        let cy0 = (r.y / self.cell).min(self.rows - 1);
        let cx1 = (r.x1().saturating_sub(1) / self.cell).min(self.cols - 1);
        let cy1 = (r.y1().saturating_sub(1) / self.cell).min(self.rows - 1);
        (cx0, cy0, cx1, cy1)
    }

    fn insert(&mut self, r: Rect) {
        let id = self.rects.len() as u32;
        self.rects.push(r);
        let (cx0, cy0, cx1, cy1) = self.cells(&r);
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                self.buckets[(cy * self.cols + cx) as usize].push(id);
            }
        }
    }

    fn overlaps_any(&self, r: &Rect) -> bool {
        let (cx0, cy0, cx1, cy1) = self.cells(r);
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                for &id in &self.buckets[(cy * self.cols + cx) as usize] {
                    if self.rects[id as usize].intersects(r) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

fn repeat_char(c: char, n: usize) -> String {
    core::iter::repeat_n(c, n).collect()
}

/// Append at most one `"+"` blank per text segment (offsets `±k·w`, `k`
/// ascending, left before right) and, in contrastive mode, at most one `"-"`
/// blank about `10·h̄` above or below.
pub fn inject_blank_segments(
    segments: &mut Vec<LineSegment>,
    page_width: u32,
    page_height: u32,
    stats: &CharStats,
    contrastive_mode: bool,
) {
    let mut index = BoxIndex::new(page_width, page_height, 64);
    for s in segments.iter() {
        index.insert(s.rect);
    }
    let text_count = segments.len();
    let wide = page_width as i64;
    let tall = page_height as i64;
    let gap = math::round(10.0 * stats.mean_height) as i64;

    for i in 0..text_count {
        if segments[i].kind != SegmentKind::Text {
            continue;
        }
        let Rect { x, y, w, h } = segments[i].rect;
        let (x, y, w64, h64) = (x as i64, y as i64, w as i64, h as i64);
        let steps = page_width / w;

        let mut placed: Option<Rect> = None;
        'plus: for k in 1..=steps as i64 {
            for d in [-1i64, 1] {
                let nx = x + d * k * w64;
                let ok = if contrastive_mode {
                    3 * nx >= wide && 3 * (nx + w64) <= 2 * wide
                } else {
                    nx >= 0 && nx + w64 <= wide
                };
                if !ok {
                    continue;
                }
                let cand = Rect::new(nx as u32, y as u32, w, h);
                if !index.overlaps_any(&cand) {
                    placed = Some(cand);
                    break 'plus;
                }
            }
        }
        if let Some(rect) = placed {
            index.insert(rect);
            let s = &segments[i];
            let blank = LineSegment {
                rect,
                line: s.line,
                text: repeat_char('+', s.char_count),
                kind: SegmentKind::Blank,
                char_count: s.char_count,
                source: Some(i),
            };
            segments.push(blank);
        }

        if !contrastive_mode {
            continue;
        }
        let mut hard: Option<Rect> = None;
        'minus: for dy in [-gap, gap] {
            let ny = y + dy;
            if ny < 0 || ny + h64 > tall {
                continue;
            }
            for k in 1..=steps as i64 {
                for d in [-1i64, 1] {
                    let nx = x + d * k * w64;
                    if nx < 0 || nx + w64 > wide {
                        continue;
                    }
                    let cand = Rect::new(nx as u32, ny as u32, w, h);
                    if !index.overlaps_any(&cand) {
                        hard = Some(cand);
                        break 'minus;
                    }
                }
            }
        }
        if let Some(rect) = hard {
            index.insert(rect);
            let s = &segments[i];
            let blank = LineSegment {
                rect,
                line: s.line,
                text: repeat_char('-', s.char_count),
                kind: SegmentKind::HardBlank,
                char_count: s.char_count,
                source: Some(i),
            };
            segments.push(blank);
        }
    }
}

/// Full extraction: clustering, run enumeration, blank injection.
pub fn extract_line_segments(
    chars: &[CharBox],
    page_width: u32,
    page_height: u32,
    config: &SegmentConfig,
) -> Vec<LineSegment> {
    let Ok(stats) = compute_char_stats(chars) else {
        return Vec::new();
    };
    let dy = config
        .line_tolerance
        .unwrap_or_else(|| default_line_tolerance(&stats));
    let mut segments = Vec::new();
    for (li, mut line) in cluster_lines(chars, dy).into_iter().enumerate() {
        sort_by_midpoint(&mut line);
        segments.extend(enumerate_segments(&line, li, config.max_run));
    }
    inject_blank_segments(
        &mut segments,
        page_width,
        page_height,
        &stats,
        config.contrastive_mode,
    );
    segments
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(w: f64, h: f64) -> CharStats {
        CharStats {
            mean_width: w,
            mean_height: h,
        }
    }

    #[test]
    fn identical_vertical_span_is_one_line() {
        let chars = [CharBox::new("a", 0, 5, 4, 10), CharBox::new("b", 10, 5, 4, 10)];
        assert_eq!(cluster_lines(&chars, 0).len(), 1);
    }

    #[test]
    fn far_apart_chars_split() {
        let chars = [CharBox::new("a", 0, 0, 4, 10), CharBox::new("b", 0, 100, 4, 10)];
        assert_eq!(cluster_lines(&chars, 5).len(), 2);
    }

    #[test]
    fn singleton_and_triple_counts() {
        let one = [CharBox::new("a", 3, 4, 5, 6)];
        let segs = enumerate_segments(&one, 0, None);
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].rect, Rect::new(3, 4, 5, 6));
        let three = [
            CharBox::new("a", 0, 0, 5, 6),
            CharBox::new("b", 6, 0, 5, 6),
            CharBox::new("c", 12, 0, 5, 6),
        ];
        assert_eq!(enumerate_segments(&three, 0, None).len(), 6);
    }

    #[test]
    fn pair_union_box() {
        let line = [CharBox::new("a", 0, 0, 5, 8), CharBox::new("b", 6, 0, 5, 8)];
        let segs = enumerate_segments(&line, 0, None);
        let ab = segs.iter().find(|s| s.text == "ab").unwrap();
        assert_eq!(ab.rect, Rect::new(0, 0, 11, 8));
        assert_eq!(ab.char_count, 2);
    }

    #[test]
    fn run_cap_limits_length() {
        let line: Vec<CharBox> = (0..5).map(|i| CharBox::new("x", i * 6, 0, 5, 8)).collect();
        let segs = enumerate_segments(&line, 0, Some(2));
        assert_eq!(segs.len(), 5 + 4);
        assert!(segs.iter().all(|s| s.char_count <= 2));
    }

    fn text_seg(rect: Rect) -> LineSegment {
        LineSegment {
            rect,
            line: 0,
            text: "ab".into(),
            kind: SegmentKind::Text,
            char_count: 2,
            source: None,
        }
    }

    #[test]
    fn full_width_segment_gets_no_blank() {
        let mut segs = vec![text_seg(Rect::new(0, 0, 300, 10))];
        inject_blank_segments(&mut segs, 300, 100, &stats(10.0, 10.0), false);
        assert_eq!(segs.len(), 1);
    }

    #[test]
    fn first_free_offset_is_to_the_right() {
        let mut segs = vec![text_seg(Rect::new(10, 10, 20, 10))];
        inject_blank_segments(&mut segs, 300, 100, &stats(10.0, 10.0), false);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[1].rect, Rect::new(30, 10, 20, 10));
        assert_eq!(segs[1].text, "++");
        assert_eq!(segs[1].kind, SegmentKind::Blank);
    }

    #[test]
    fn contrastive_blank_lands_in_central_third() {
        let mut segs = vec![text_seg(Rect::new(10, 10, 20, 10))];
        inject_blank_segments(&mut segs, 300, 100, &stats(10.0, 1.0), true);
        let plus = segs.iter().find(|s| s.kind == SegmentKind::Blank).unwrap();
        // offsets 30, 50, 70, 90 fall left of x = 100; k = 5 gives 110
        assert_eq!(plus.rect.x, 110);
        let minus = segs.iter().find(|s| s.kind == SegmentKind::HardBlank).unwrap();
        assert_eq!(minus.text, "--");
        // gap of 10 px upward reaches y = 0, then the first free horizontal offset
        assert_eq!(minus.rect, Rect::new(30, 0, 20, 10));
    }

    #[test]
    fn empty_document_yields_nothing() {
        assert!(extract_line_segments(&[], 100, 100, &SegmentConfig::default()).is_empty());
    }

    #[test]
    fn two_chars_give_three_text_segments() {
        let chars = [CharBox::new("a", 10, 10, 5, 8), CharBox::new("b", 16, 10, 5, 8)];
        let segs = extract_line_segments(&chars, 200, 100, &SegmentConfig::default());
        assert_eq!(segs.iter().filter(|s| !s.is_blank()).count(), 3);
    }

    #[test]
    fn two_lines_of_two() {
        let chars = [
            CharBox::new("a", 10, 10, 5, 8),
            CharBox::new("b", 16, 10, 5, 8),
            CharBox::new("c", 10, 60, 5, 8),
            CharBox::new("d", 16, 60, 5, 8),
        ];
        let segs = extract_line_segments(&chars, 200, 100, &SegmentConfig::default());
        assert_eq!(segs.iter().filter(|s| !s.is_blank()).count(), 6);
    }
}
