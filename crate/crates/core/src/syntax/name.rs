use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

/// A variable or constant name.
///
/// Two names are the same only when both the text and the freshness counter
/// agree. Parsed names always carry `uid == 0`; renaming bumps the counter
/// while keeping the text for readable output.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    text: Arc<str>,
    uid: u32,
}

impl Name {
    pub fn new(text: impl AsRef<str>) -> Name {
        Name {
            text: Arc::from(text.as_ref()),
            uid: 0,
        }
    }

    pub fn with_uid(text: impl AsRef<str>, uid: u32) -> Name {
        Name {
            text: Arc::from(text.as_ref()),
            uid,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn uid(&self) -> u32 {
        self.uid
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.uid == 0 {
            write!(f, "{}", self.text)
        } else {
            write!(f, "{}'{}", self.text, self.uid)
        }
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<&str> for Name {
    fn from(text: &str) -> Name {
        Name::new(text)
    }
}

/// Returns `base` itself when it is not in `avoid`, otherwise the first name
/// with the same text and a larger counter that is not in `avoid`.
pub fn fresh_name(base: &Name, avoid: &HashSet<Name>) -> Name {
    if !avoid.contains(base) {
        return base.clone();
    }
    let mut uid = base.uid + 1;
    loop {
        let candidate = Name {
            text: base.text.clone(),
            uid,
        };
        if !avoid.contains(&candidate) {
            return candidate;
        }
        uid += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_name_examples() {
        let x = Name::new("x");
        assert_eq!(fresh_name(&x, &HashSet::new()), x);

        let avoid: HashSet<Name> = [x.clone()].into_iter().collect();
        let x1 = fresh_name(&x, &avoid);
        assert_ne!(x1, x);
        assert_eq!(x1.text(), "x");

        let avoid: HashSet<Name> = [x.clone(), x1.clone()].into_iter().collect();
        let x2 = fresh_name(&x, &avoid);
        assert!(!avoid.contains(&x2));
    }

    #[test]
    fn identity_needs_both_fields() {
        assert_ne!(Name::new("x"), Name::with_uid("x", 1));
        assert_ne!(Name::new("x"), Name::new("y"));
        assert_eq!(Name::with_uid("x", 3), Name::with_uid("x", 3));
    }

    proptest::proptest! {
        #[test]
        fn fresh_name_avoids(uids in proptest::collection::hash_set(0u32..20, 0..15), base in 0u32..20) {
            let avoid: HashSet<Name> = uids.iter().map(|u| Name::with_uid("v", *u)).collect();
            let fresh = fresh_name(&Name::with_uid("v", base), &avoid);
            proptest::prop_assert!(!avoid.contains(&fresh));
            proptest::prop_assert_eq!(fresh.text(), "v");
        }
    }
}
