//! Per-width caches of packed RB/TB streams, indexed by ones budget.

use std::borrow::Cow;
use std::sync::OnceLock;

use crate::generators::{rb_words, tb_words};

const CACHED_MAX_WIDTH: u32 = 12;

struct StreamTable {
    words_per_stream: usize,
    rb: Vec<u64>,
    tb: Vec<u64>,
}

impl StreamTable {
    fn build(width_bits: u32) -> Self {
        let len = 1u32 << width_bits;
        let words_per_stream = (len as usize).div_ceil(64);
        let mut rb = Vec::with_capacity(words_per_stream * len as usize);
        let mut tb = Vec::with_capacity(words_per_stream * len as usize);
        for u in 0..len {
            rb.extend(rb_words(u, width_bits));
            tb.extend(tb_words(u, width_bits));
        }
        Self {
            words_per_stream,
            rb,
            tb,
        }
    }
}

static TABLES: [OnceLock<StreamTable>; CACHED_MAX_WIDTH as usize + 1] =
    [const { OnceLock::new() }; CACHED_MAX_WIDTH as usize + 1];

fn table(width_bits: u32) -> Option<&'static StreamTable> {
    (width_bits <= CACHED_MAX_WIDTH)
        .then(|| TABLES[width_bits as usize].get_or_init(|| StreamTable::build(width_bits)))
}

pub(crate) fn rb(budget: u32, width_bits: u32) -> Cow<'static, [u64]> {
    match table(width_bits) {
        Some(t) => {
            let at = budget as usize * t.words_per_stream;
            Cow::Borrowed(&t.rb[at..at + t.words_per_stream])
        }
        None => Cow::Owned(rb_words(budget, width_bits)),
    }
}

pub(crate) fn tb(budget: u32, width_bits: u32) -> Cow<'static, [u64]> {
    match table(width_bits) {
        Some(t) => {
            let at = budget as usize * t.words_per_stream;
            Cow::Borrowed(&t.tb[at..at + t.words_per_stream])
        }
        None => Cow::Owned(tb_words(budget, width_bits)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cached_rows_match_generators() {
        for n in [1, 3, 8] {
            for u in 0..1u32 << n {
                assert_eq!(&*rb(u, n), rb_words(u, n).as_slice());
                assert_eq!(&*tb(u, n), tb_words(u, n).as_slice());
            }
        }
        assert_eq!(&*rb(1234, 13), rb_words(1234, 13).as_slice());
    }
}
