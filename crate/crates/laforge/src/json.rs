//! Deterministic JSON output: keys in insertion order, reals with 12
//! significant digits.

use laforge_core::numkit::{Mat, Vector};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Node>),
    Obj(Vec<(String, Node)>),
}

impl Node {
    pub fn obj() -> Node {
        Node::Obj(Vec::new())
    }

    /// Appends a key; panics on non-objects, which is a programming error.
    pub fn with(mut self, key: &str, value: impl Into<Node>) -> Node {
        match &mut self {
            Node::Obj(v) => v.push((key.to_string(), value.into())),
            _ => panic!("with() on a non-object"),
        }
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Node>) {
        match self {
            Node::Obj(v) => v.push((key.to_string(), value.into())),
            _ => panic!("push() on a non-object"),
        }
    }

    pub fn get(&self, key: &str) -> Option<&Node> {
        match self {
            Node::Obj(v) => v.iter().find(|(k, _)| k == key).map(|(_, n)| n),
            _ => None,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        write_node(self, 0, &mut out);
        out.push('\n');
        out
    }
}

impl From<bool> for Node {
    fn from(b: bool) -> Self {
        Node::Bool(b)
    }
}
impl From<f64> for Node {
    fn from(x: f64) -> Self {
        Node::Num(x)
    }
}
impl From<usize> for Node {
    fn from(x: usize) -> Self {
        Node::Int(x as i64)
    }
}
impl From<u64> for Node {
    fn from(x: u64) -> Self {
        Node::Int(x as i64)
    }
}
impl From<&str> for Node {
    fn from(s: &str) -> Self {
        Node::Str(s.to_string())
    }
}
impl From<String> for Node {
    fn from(s: String) -> Self {
        Node::Str(s)
    }
}
impl<T: Into<Node>> From<Vec<T>> for Node {
    fn from(v: Vec<T>) -> Self {
        Node::Arr(v.into_iter().map(Into::into).collect())
    }
}
impl<T: Into<Node>> From<Option<T>> for Node {
    fn from(v: Option<T>) -> Self {
        v.map_or(Node::Null, Into::into)
    }
}

impl From<&serde_json::Value> for Node {
    fn from(v: &serde_json::Value) -> Self {
        use serde_json::Value;
        match v {
            Value::Null => Node::Null,
            Value::Bool(b) => Node::Bool(*b),
            Value::Number(n) => match n.as_i64() {
                Some(i) => Node::Int(i),
                None => Node::Num(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::String(s) => Node::Str(s.clone()),
            Value::Array(a) => Node::Arr(a.iter().map(Node::from).collect()),
            Value::Object(o) => Node::Obj(o.iter().map(|(k, v)| (k.clone(), Node::from(v))).collect()),
        }
    }
}

pub fn vector(v: &Vector) -> Node {
    Node::Arr(v.iter().map(|x| Node::Num(*x)).collect())
}

/// Row-major nested arrays.
pub fn matrix(m: &Mat) -> Node {
    Node::Arr((0..m.nrows()).map(|i| Node::Arr((0..m.ncols()).map(|j| Node::Num(m[(i, j)])).collect())).collect())
}

/// 12 significant digits in exponent form; non-finite values become null
/// because JSON has no representation for them.
pub fn number(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.11e}")
}

fn write_node(n: &Node, indent: usize, out: &mut String) {
    let pad = |k: usize| "  ".repeat(k);
    match n {
        Node::Null => out.push_str("null"),
        Node::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Node::Int(i) => out.push_str(&i.to_string()),
        Node::Num(x) => out.push_str(&number(*x)),
        Node::Str(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Node::Arr(a) if a.is_empty() => out.push_str("[]"),
        Node::Arr(a) if a.iter().all(is_scalar) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_node(x, indent, out);
            }
            out.push(']');
        }
        Node::Arr(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_node(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Node::Obj(o) if o.is_empty() => out.push_str("{}"),
        Node::Obj(o) => {
            out.push_str("{\n");
            for (i, (k, v)) in o.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("strings serialize"));
                out.push_str(": ");
                write_node(v, indent + 1, out);
                out.push_str(if i + 1 < o.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

fn is_scalar(n: &Node) -> bool {
    !matches!(n, Node::Arr(_) | Node::Obj(_))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(number(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(number(-2.5e-7), "-2.50000000000e-7");
        assert_eq!(number(0.0), "0");
        assert_eq!(number(f64::NAN), "null");
    }

    #[test]
    fn keys_keep_insertion_order_and_output_parses() {
        let n = Node::obj().with("b", 1.0).with("a", vec![1usize, 2]).with("c", Node::obj().with("x", "y"));
        let s = n.render();
        assert!(s.find("\"b\"").unwrap() < s.find("\"a\"").unwrap());
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["c"]["x"], "y");
        assert_eq!(v["b"].as_f64(), Some(1.0));
    }
}
