//! Concept/role syntax trees and their canonical text form.

use std::fmt;

use super::FeatureError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Concept {
    Top,
    Bot,
    /// Objects at argument `pos` of some true `pred` atom.
    Primitive {
        pred: String,
        pos: usize,
    },
    /// Objects of type `ty` (subtypes included).
    Type(String),
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Some(Box<Role>, Box<Concept>),
    All(Box<Role>, Box<Concept>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Role {
    Primitive {
        pred: String,
        from: usize,
        to: usize,
    },
    Inverse(Box<Role>),
    Compose(Box<Role>, Box<Role>),
    And(Box<Role>, Box<Role>),
    Diff(Box<Role>, Box<Role>),
}

impl Concept {
    pub fn primitive(pred: &str, pos: usize) -> Concept {
        Concept::Primitive {
            pred: pred.to_string(),
            pos,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Concept {
        Concept::Not(Box::new(c))
    }

    pub fn and(a: Concept, b: Concept) -> Concept {
        Concept::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Concept, b: Concept) -> Concept {
        Concept::Or(Box::new(a), Box::new(b))
    }

    pub fn some(r: Role, c: Concept) -> Concept {
        Concept::Some(Box::new(r), Box::new(c))
    }

    pub fn all(r: Role, c: Concept) -> Concept {
        Concept::All(Box::new(r), Box::new(c))
    }

    pub fn complexity(&self) -> usize {
        match self {
            Concept::Top | Concept::Bot | Concept::Primitive { .. } | Concept::Type(_) => 1,
            Concept::Not(c) => 1 + c.complexity(),
            Concept::And(a, b) | Concept::Or(a, b) => 1 + a.complexity() + b.complexity(),
            Concept::Some(r, c) | Concept::All(r, c) => 1 + r.complexity() + c.complexity(),
        }
    }
}

impl Role {
    pub fn primitive(pred: &str, from: usize, to: usize) -> Role {
        Role::Primitive {
            pred: pred.to_string(),
            from,
            to,
        }
    }

    pub fn inverse(r: Role) -> Role {
        Role::Inverse(Box::new(r))
    }

    pub fn compose(a: Role, b: Role) -> Role {
        Role::Compose(Box::new(a), Box::new(b))
    }

    pub fn and(a: Role, b: Role) -> Role {
        Role::And(Box::new(a), Box::new(b))
    }

    pub fn diff(a: Role, b: Role) -> Role {
        Role::Diff(Box::new(a), Box::new(b))
    }

    pub fn complexity(&self) -> usize {
        match self {
            Role::Primitive { .. } => 1,
            Role::Inverse(r) => 1 + r.complexity(),
            Role::Compose(a, b) | Role::And(a, b) | Role::Diff(a, b) => {
                1 + a.complexity() + b.complexity()
            }
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => write!(f, "c_top"),
            Concept::Bot => write!(f, "c_bot"),
            Concept::Primitive { pred, pos } => write!(f, "c_primitive({pred},{pos})"),
            Concept::Type(t) => write!(f, "c_type({t})"),
            Concept::Not(c) => write!(f, "c_not({c})"),
            Concept::And(a, b) => write!(f, "c_and({a},{b})"),
            Concept::Or(a, b) => write!(f, "c_or({a},{b})"),
            Concept::Some(r, c) => write!(f, "c_some({r},{c})"),
            Concept::All(r, c) => write!(f, "c_all({r},{c})"),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Primitive { pred, from, to } => write!(f, "r_primitive({pred},{from},{to})"),
            Role::Inverse(r) => write!(f, "r_inverse({r})"),
            Role::Compose(a, b) => write!(f, "r_compose({a},{b})"),
            Role::And(a, b) => write!(f, "r_and({a},{b})"),
            Role::Diff(a, b) => write!(f, "r_diff({a},{b})"),
        }
    }
}

/// Recursive-descent reader for canonical strings. Whitespace is ignored.
pub(crate) struct Reader<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(text: &'a str) -> Reader<'a> {
        Reader { text, pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> FeatureError {
        FeatureError::Parse {
            text: self.text.to_string(),
            offset: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.text[self.pos..]
                .chars()
                .next()
                .map_or(1, char::len_utf8);
        }
    }

    fn ident(&mut self) -> Result<&'a str, FeatureError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected identifier"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn number(&mut self) -> Result<usize, FeatureError> {
        let start = self.pos;
        let id = self.ident()?;
        id.parse().map_err(|_| FeatureError::Parse {
            text: self.text.to_string(),
            offset: start,
            msg: format!("expected number, found {id}"),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), FeatureError> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    pub fn finish(&mut self) -> Result<(), FeatureError> {
        self.skip_ws();
        if self.pos == self.text.len() {
            Ok(())
        } else {
            Err(self.err("trailing input"))
        }
    }

    pub fn head(&mut self) -> Result<&'a str, FeatureError> {
        self.ident()
    }

    pub fn open(&mut self) -> Result<(), FeatureError> {
        self.expect('(')
    }

    pub fn close(&mut self) -> Result<(), FeatureError> {
        self.expect(')')
    }

    pub fn concept(&mut self) -> Result<Concept, FeatureError> {
        let start = self.pos;
        let head = self.ident()?;
        let c = match head {
            "c_top" => return Ok(Concept::Top),
            "c_bot" => return Ok(Concept::Bot),
            "c_primitive" => {
                self.expect('(')?;
                let pred = self.ident()?.to_string();
                self.expect(',')?;
                let pos = self.number()?;
                Concept::Primitive { pred, pos }
            }
            "c_type" => {
                self.expect('(')?;
                Concept::Type(self.ident()?.to_string())
            }
            "c_not" => {
                self.expect('(')?;
                Concept::not(self.concept()?)
            }
            "c_and" | "c_or" => {
                self.expect('(')?;
                let a = self.concept()?;
                self.expect(',')?;
                let b = self.concept()?;
                if head == "c_and" {
                    Concept::and(a, b)
                } else {
                    Concept::or(a, b)
                }
            }
            "c_some" | "c_all" => {
                self.expect('(')?;
                let r = self.role()?;
                self.expect(',')?;
                let c = self.concept()?;
                if head == "c_some" {
                    Concept::some(r, c)
                } else {
                    Concept::all(r, c)
                }
            }
            other => {
                self.pos = start;
                return Err(self.err(format!("unknown concept constructor {other}")));
            }
        };
        self.expect(')')?;
        Ok(c)
    }

    pub fn role(&mut self) -> Result<Role, FeatureError> {
        let start = self.pos;
        let head = self.ident()?;
        self.expect('(')?;
        let r = match head {
            "r_primitive" => {
                let pred = self.ident()?.to_string();
                self.expect(',')?;
                let from = self.number()?;
                self.expect(',')?;
                let to = self.number()?;
                Role::Primitive { pred, from, to }
            }
            "r_inverse" => Role::inverse(self.role()?),
            "r_compose" | "r_and" | "r_diff" => {
                let a = self.role()?;
                self.expect(',')?;
                let b = self.role()?;
                match head {
                    "r_compose" => Role::compose(a, b),
                    "r_and" => Role::and(a, b),
                    _ => Role::diff(a, b),
                }
            }
            other => {
                self.pos = start;
                return Err(self.err(format!("unknown role constructor {other}")));
            }
        };
        self.expect(')')?;
        Ok(r)
    }
}

pub fn parse_concept(text: &str) -> Result<Concept, FeatureError> {
    let mut r = Reader::new(text);
    let c = r.concept()?;
    r.finish()?;
    Ok(c)
}

pub fn parse_role(text: &str) -> Result<Role, FeatureError> {
    let mut r = Reader::new(text);
    let x = r.role()?;
    r.finish()?;
    Ok(x)
}
