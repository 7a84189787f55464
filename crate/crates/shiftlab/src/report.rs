//! Deterministic report formatting.
//!
//! Reports are emitted as JSON with a fixed key order and reals printed with
//! 17 significant digits, so identical runs produce byte-identical files.

/// Formats a real with 17 significant digits (full binary64 round trip).
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{:.16e}", v)
}

/// Minimal ordered-key JSON writer for report structs.
pub struct JsonWriter {
    buf: String,
    first: Vec<bool>,
}

impl JsonWriter {
    pub fn new() -> Self {
        let mut w = Self { buf: String::new(), first: vec![true] };
        w.buf.push('{');
        w
    }

    fn pre_key(&mut self, key: &str) {
        if !*self.first.last().unwrap() {
            self.buf.push(',');
        }
        *self.first.last_mut().unwrap() = false;
        self.buf.push('"');
        self.buf.push_str(key);
        self.buf.push_str("\":");
    }

    pub fn real(&mut self, key: &str, v: f64) -> &mut Self {
        self.pre_key(key);
        if v.is_finite() {
            self.buf.push_str(&fmt_f64(v));
        } else {
            // JSON has no inf/nan literals
            self.buf.push('"');
            self.buf.push_str(&fmt_f64(v));
            self.buf.push('"');
        }
        self
    }

    pub fn int(&mut self, key: &str, v: i64) -> &mut Self {
        self.pre_key(key);
        self.buf.push_str(&v.to_string());
        self
    }

    pub fn uint(&mut self, key: &str, v: u64) -> &mut Self {
        self.pre_key(key);
        self.buf.push_str(&v.to_string());
        self
    }

    pub fn boolean(&mut self, key: &str, v: bool) -> &mut Self {
        self.pre_key(key);
        self.buf.push_str(if v { "true" } else { "false" });
        self
    }

    pub fn string(&mut self, key: &str, v: &str) -> &mut Self {
        self.pre_key(key);
        self.buf.push_str(&serde_json::to_string(v).expect("string encodes"));
        self
    }

    pub fn null(&mut self, key: &str) -> &mut Self {
        self.pre_key(key);
        self.buf.push_str("null");
        self
    }

    pub fn begin_object(&mut self, key: &str) -> &mut Self {
        self.pre_key(key);
        self.buf.push('{');
        self.first.push(true);
        self
    }

    pub fn end_object(&mut self) -> &mut Self {
        self.buf.push('}');
        self.first.pop();
        self
    }

    pub fn real_array(&mut self, key: &str, vs: &[f64]) -> &mut Self {
        self.pre_key(key);
        self.buf.push('[');
        for (i, v) in vs.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(&fmt_f64(*v));
        }
        self.buf.push(']');
        self
    }

    pub fn finish(mut self) -> String {
        while self.first.len() > 1 {
            self.buf.push('}');
            self.first.pop();
        }
        self.buf.push('}');
        self.buf.push('\n');
        self.buf
    }
}

impl Default for JsonWriter {
    fn default() -> Self {
        Self::new()
    }
}
