//! Name-keyed registries of interchangeable strategies.
//!
//! Each family (Hall checkers, extractor verifiers, fingerprint schemes) is a
//! trait object implementing [`Named`]; callers look one up by the name given
//! on the command line.

use crate::error::{Error, Result};

pub trait Named {
    fn name(&self) -> &'static str;
}

impl<T: Named + ?Sized> Named for Box<T> {
    fn name(&self) -> &'static str {
        self.as_ref().name()
    }
}

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<Box<T>>,
}

impl<T: Named + ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: Vec::new(),
        }
    }

    /// Registers `entry`, replacing any earlier entry with the same name.
    pub fn register(&mut self, entry: Box<T>) -> &mut Self {
        self.entries.retain(|e| e.name() != entry.name());
        self.entries.push(entry);
        self
    }

    pub fn with(mut self, entry: Box<T>) -> Self {
        self.register(entry);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|e| e.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Shout: Named {
        fn shout(&self) -> String;
    }

    struct Loud(&'static str);

    impl Named for Loud {
        fn name(&self) -> &'static str {
            self.0
        }
    }

    impl Shout for Loud {
        fn shout(&self) -> String {
            self.0.to_uppercase()
        }
    }

    #[test]
    fn lookup_by_name() {
        let reg = Registry::<dyn Shout>::new("shouter")
            .with(Box::new(Loud("a")))
            .with(Box::new(Loud("b")));
        assert_eq!(reg.get("b").unwrap().shout(), "B");
        assert_eq!(reg.names(), vec!["a", "b"]);
        let err = reg.get("c").err().unwrap().to_string();
        assert!(err.contains("unknown shouter `c`"), "{err}");
    }

    #[test]
    fn re_register_replaces() {
        let mut reg: Registry<dyn Shout> = Registry::new("shouter");
        reg.register(Box::new(Loud("a")));
        reg.register(Box::new(Loud("a")));
        assert_eq!(reg.names().len(), 1);
    }
}
