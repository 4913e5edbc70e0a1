//! Messages exchanged by node programs, with bit-exact payloads.

use std::fmt;

/// Payload capacity in bits; `4b + 16` at the largest supported `b`.
pub const PAYLOAD_CAPACITY: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    BfsToken,
    Color,
    AncestorFlag,
    SizePartial,
    Propose,
    Decision,
    Outcome,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tag::BfsToken => "bfs-token",
            Tag::Color => "color",
            Tag::AncestorFlag => "ancestor-flag",
            Tag::SizePartial => "size-partial",
            Tag::Propose => "propose",
            Tag::Decision => "decision",
            Tag::Outcome => "outcome",
        };
        f.write_str(s)
    }
}

/// A bit string of at most `PAYLOAD_CAPACITY` bits.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Payload {
    words: [u64; PAYLOAD_CAPACITY / 64],
    len: u16,
}

impl Payload {
    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push(&mut self, value: u64, width: u32) -> &mut Self {
        assert!(width <= 64, "field wider than 64 bits");
        assert!(
            width == 64 || value >> width == 0,
            "value {value} does not fit in {width} bits"
        );
        assert!(
            self.len() + width as usize <= PAYLOAD_CAPACITY,
            "payload overflow"
        );
        for i in (0..width).rev() {
            let bit = (value >> i) & 1;
            let pos = self.len();
            self.words[pos / 64] |= bit << (pos % 64);
            self.len += 1;
        }
        self
    }

    pub fn push_bool(&mut self, bit: bool) -> &mut Self {
        self.push(bit as u64, 1)
    }

    pub fn reader(&self) -> PayloadReader<'_> {
        PayloadReader {
            payload: self,
            pos: 0,
        }
    }

    fn bit(&self, pos: usize) -> u64 {
        (self.words[pos / 64] >> (pos % 64)) & 1
    }
}

impl fmt::Debug for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = (0..self.len())
            .map(|i| if self.bit(i) == 1 { '1' } else { '0' })
            .collect();
        write!(f, "Payload({bits})")
    }
}

pub struct PayloadReader<'a> {
    payload: &'a Payload,
    pos: usize,
}

impl PayloadReader<'_> {
    /// Reads `width` bits. Reading past the end is a programming error.
    pub fn read(&mut self, width: u32) -> u64 {
        assert!(
            self.pos + width as usize <= self.payload.len(),
            "payload underflow"
        );
        let mut v = 0;
        for _ in 0..width {
            v = (v << 1) | self.payload.bit(self.pos);
            self.pos += 1;
        }
        v
    }

    pub fn read_bool(&mut self) -> bool {
        self.read(1) == 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Message {
    pub tag: Tag,
    pub payload: Payload,
}

impl Message {
    pub fn new(tag: Tag, payload: Payload) -> Self {
        Message { tag, payload }
    }

    pub fn bits(&self) -> usize {
        self.payload.len()
    }
}

/// Per-message bit budget: `4b + 16`.
pub fn message_budget(b: u32) -> usize {
    4 * b as usize + 16
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetViolation {
    pub bits: usize,
    pub limit: usize,
}

pub fn validate_message(m: &Message, b: u32) -> Result<(), BudgetViolation> {
    let limit = message_budget(b);
    if m.bits() <= limit {
        Ok(())
    } else {
        Err(BudgetViolation {
            bits: m.bits(),
            limit,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn message_of(bits: usize) -> Message {
        let mut p = Payload::default();
        for _ in 0..bits {
            p.push_bool(true);
        }
        Message::new(Tag::Color, p)
    }

    #[test]
    fn budget_boundaries() {
        let b = 5;
        assert!(validate_message(&message_of(2 * b as usize), b).is_ok());
        assert!(validate_message(&message_of(4 * b as usize + 16), b).is_ok());
        assert_eq!(
            validate_message(&message_of(4 * b as usize + 17), b),
            Err(BudgetViolation {
                bits: 37,
                limit: 36
            })
        );
    }

    #[test]
    #[should_panic(expected = "does not fit")]
    fn oversized_field_panics() {
        Payload::default().push(8, 3);
    }

    proptest! {
        #[test]
        fn fields_read_back(fields in prop::collection::vec((0u32..=64, any::<u64>()), 0..6)) {
            let mut p = Payload::default();
            let mut expect = Vec::new();
            for (w, v) in fields {
                let v = if w == 64 { v } else if w == 0 { 0 } else { v & ((1u64 << w) - 1) };
                if p.len() + w as usize > PAYLOAD_CAPACITY {
                    break;
                }
                p.push(v, w);
                expect.push((w, v));
            }
            let mut r = p.reader();
            for (w, v) in expect {
                prop_assert_eq!(r.read(w), v);
            }
        }
    }
}
