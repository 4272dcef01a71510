use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the eight books of the corpus. Declaration order is the label id
/// order `g1..g8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum BookLabel {
    Buddhism,
    TaoTeChing,
    Upanishad,
    YogaSutra,
    Proverb,
    Ecclesiastes,
    Ecclesiasticus,
    Wisdom,
}

impl BookLabel {
    pub const ALL: [BookLabel; 8] = [
        BookLabel::Buddhism,
        BookLabel::TaoTeChing,
        BookLabel::Upanishad,
        BookLabel::YogaSutra,
        BookLabel::Proverb,
        BookLabel::Ecclesiastes,
        BookLabel::Ecclesiasticus,
        BookLabel::Wisdom,
    ];

    pub const COUNT: usize = 8;

    /// Zero-based position in `ALL`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<BookLabel> {
        Self::ALL.get(i).copied()
    }

    /// `g1` .. `g8`.
    pub fn id(self) -> &'static str {
        ["g1", "g2", "g3", "g4", "g5", "g6", "g7", "g8"][self.index()]
    }

    pub fn display_name(self) -> &'static str {
        match self {
            BookLabel::Buddhism => "Buddhism",
            BookLabel::TaoTeChing => "TaoTeChing",
            BookLabel::Upanishad => "Upanishad",
            BookLabel::YogaSutra => "YogaSutra",
            BookLabel::Proverb => "Proverb",
            BookLabel::Ecclesiastes => "Ecclesiastes",
            BookLabel::Ecclesiasticus => "Ecclesiasticus",
            BookLabel::Wisdom => "Wisdom",
        }
    }

    /// Short node name used in graph exports.
    pub fn abbreviation(self) -> &'static str {
        match self {
            BookLabel::Buddhism => "Bdd",
            BookLabel::TaoTeChing => "Tao",
            BookLabel::Upanishad => "Upd",
            BookLabel::YogaSutra => "Yoga",
            BookLabel::Proverb => "Prv",
            BookLabel::Ecclesiastes => "Ecc",
            BookLabel::Ecclesiasticus => "Ecs",
            BookLabel::Wisdom => "Wsd",
        }
    }

    /// Labels sorted by display name, the row/column order of the reference
    /// confusion tables.
    pub fn table_order() -> [BookLabel; 8] {
        let mut labels = Self::ALL;
        labels.sort_by_key(|l| l.display_name());
        labels
    }
}

impl fmt::Display for BookLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown book label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for BookLabel {
    type Err = UnknownLabel;

    /// Accepts the id (`g3`), the display name or the abbreviation,
    /// case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let needle = s.trim();
        Self::ALL
            .into_iter()
            .find(|l| {
                needle.eq_ignore_ascii_case(l.id())
                    || needle.eq_ignore_ascii_case(l.display_name())
                    || needle.eq_ignore_ascii_case(l.abbreviation())
            })
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl From<BookLabel> for String {
    fn from(l: BookLabel) -> String {
        l.display_name().to_string()
    }
}

impl TryFrom<String> for BookLabel {
    type Error = UnknownLabel;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn ids_and_names_are_bijective() {
        let ids: HashSet<_> = BookLabel::ALL.iter().map(|l| l.id()).collect();
        let names: HashSet<_> = BookLabel::ALL.iter().map(|l| l.display_name()).collect();
        assert_eq!(ids.len(), 8);
        assert_eq!(names.len(), 8);
        for l in BookLabel::ALL {
            assert_eq!(l.id().parse::<BookLabel>().unwrap(), l);
            assert_eq!(l.display_name().parse::<BookLabel>().unwrap(), l);
            assert_eq!(l.abbreviation().parse::<BookLabel>().unwrap(), l);
            assert_eq!(BookLabel::from_index(l.index()), Some(l));
        }
        assert_eq!(BookLabel::Buddhism.id(), "g1");
        assert_eq!(BookLabel::Wisdom.id(), "g8");
    }

    #[test]
    fn table_order_is_alphabetical() {
        let names: Vec<_> = BookLabel::table_order()
            .iter()
            .map(|l| l.display_name())
            .collect();
        assert_eq!(
            names,
            [
                "Buddhism",
                "Ecclesiastes",
                "Ecclesiasticus",
                "Proverb",
                "TaoTeChing",
                "Upanishad",
                "Wisdom",
                "YogaSutra"
            ]
        );
    }

    #[test]
    fn rejects_unknown() {
        assert!("g9".parse::<BookLabel>().is_err());
    }
}
