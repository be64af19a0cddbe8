//! Name-keyed registries of interchangeable strategies.
//!
//! Each strategy family (root solvers, bound evaluators, sweep input
//! families) is a trait with [`Named`] as a supertrait. A [`Registry`] holds
//! boxed trait objects in registration order so listings are deterministic.

use crate::error::{Error, Result};

pub trait Named {
    /// Stable identifier used on the command line and in output files.
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str {
        ""
    }
}

pub struct Registry<T: ?Sized + Named> {
    kind: &'static str,
    entries: Vec<Box<T>>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: Vec::new(),
        }
    }

    pub fn register(&mut self, entry: Box<T>) -> Result<()> {
        if self.entries.iter().any(|e| e.name() == entry.name()) {
            return Err(Error::DuplicateStrategy {
                kind: self.kind,
                name: entry.name().to_string(),
            });
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|e| e.name().eq_ignore_ascii_case(name))
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.entries.iter().map(|b| b.as_ref())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    trait Greeter: Named {
        fn greet(&self) -> String;
    }

    struct Hello;
    impl Named for Hello {
        fn name(&self) -> &'static str {
            "hello"
        }
    }
    impl Greeter for Hello {
        fn greet(&self) -> String {
            "hi".into()
        }
    }

    #[test]
    fn lookup_and_duplicates() {
        let mut reg: Registry<dyn Greeter> = Registry::new("greeter");
        reg.register(Box::new(Hello)).unwrap();
        assert_eq!(reg.get("HELLO").unwrap().greet(), "hi");
        assert!(matches!(
            reg.register(Box::new(Hello)),
            Err(Error::DuplicateStrategy { .. })
        ));
        match reg.get("nope") {
            Err(Error::UnknownStrategy { available, .. }) => assert_eq!(available, "hello"),
            _ => panic!("expected UnknownStrategy"),
        }
    }
}
