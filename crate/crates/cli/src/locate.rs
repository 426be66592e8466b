//! Maps JSON paths (`process.setups[1].holder[0].surface`) to the line on
//! which the value starts. Only run on text serde_json already accepted.

use std::collections::HashMap;

pub struct LineIndex {
    lines: HashMap<String, usize>,
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl Scanner<'_> {
    fn skip_ws(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            match b {
                b'\n' => self.line += 1,
                b' ' | b'\t' | b'\r' => {}
                _ => break,
            }
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn string(&mut self) -> String {
        let start = self.pos + 1;
        self.pos += 1;
        while let Some(&b) = self.bytes.get(self.pos) {
            match b {
                b'\\' => self.pos += 2,
                b'"' => break,
                _ => self.pos += 1,
            }
        }
        let s = String::from_utf8_lossy(&self.bytes[start..self.pos.min(self.bytes.len())]).into_owned();
        self.pos += 1;
        s
    }

    fn value(&mut self, path: &str, out: &mut HashMap<String, usize>) {
        self.skip_ws();
        out.insert(path.to_string(), self.line);
        match self.peek() {
            Some(b'{') => {
                self.pos += 1;
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b'"') => {
                            let key = self.string();
                            self.skip_ws();
                            self.pos += 1; // ':'
                            let child = if path.is_empty() { key } else { format!("{path}.{key}") };
                            self.value(&child, out);
                        }
                        Some(b',') => self.pos += 1,
                        Some(b'}') => {
                            self.pos += 1;
                            break;
                        }
                        _ => break,
                    }
                }
            }
            Some(b'[') => {
                self.pos += 1;
                let mut i = 0;
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b']') => {
                            self.pos += 1;
                            break;
                        }
                        None => break,
                        _ => {
                            self.value(&format!("{path}[{i}]"), out);
                            i += 1;
                        }
                    }
                }
            }
            Some(b'"') => {
                self.string();
            }
            _ => {
                while let Some(b) = self.peek() {
                    if matches!(b, b',' | b'}' | b']') || b.is_ascii_whitespace() {
                        break;
                    }
                    self.pos += 1;
                }
            }
        }
    }
}

impl LineIndex {
    pub fn new(text: &str) -> LineIndex {
        let mut lines = HashMap::new();
        let mut s = Scanner { bytes: text.as_bytes(), pos: 0, line: 1 };
        s.value("", &mut lines);
        LineIndex { lines }
    }

    /// Line of `path`, or of its closest recorded ancestor.
    pub fn line_of(&self, path: &str) -> Option<usize> {
        let mut p = path;
        loop {
            if let Some(&l) = self.lines.get(p) {
                return Some(l);
            }
            let cut = p.rfind(['.', '['])?;
            p = &p[..cut];
        }
    }
}
