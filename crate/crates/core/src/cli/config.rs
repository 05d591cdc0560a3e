//! JSON experiment configuration with `key=value` overrides.
//!
//! Every value read through a getter is recorded, defaults included, so the
//! echoed configuration describes the run completely.

use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    map: Map<String, Value>,
}

fn bad(key: &str, want: &str, v: &Value) -> Error {
    Error::InvalidInput(format!("config key `{key}`: expected {want}, got {v}"))
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config is not valid JSON: {e}")))?;
        match v {
            Value::Object(map) => Ok(Config { map }),
            other => Err(Error::InvalidInput(format!("config must be a JSON object, got {other}"))),
        }
    }

    /// `key=value`; the value is parsed as JSON and kept as a string otherwise.
    pub fn apply_set(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("--set expects key=value, got `{kv}`")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::InvalidInput(format!("--set has an empty key in `{kv}`")));
        }
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        self.map.insert(k.to_string(), value);
        Ok(())
    }

    pub fn set_value(&mut self, key: &str, v: Value) {
        self.map.insert(key.to_string(), v);
    }

    pub fn remove(&mut self, key: &str) {
        self.map.remove(key);
    }

    pub fn echo(&self) -> Value {
        Value::Object(self.map.clone())
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.get(key).is_some_and(|v| !v.is_null())
    }

    fn fetch(&mut self, key: &str, default: Option<Value>) -> Result<Value> {
        match self.map.get(key) {
            Some(v) if !v.is_null() => Ok(v.clone()),
            _ => match default {
                Some(d) => {
                    self.map.insert(key.to_string(), d.clone());
                    Ok(d)
                }
                None => Err(Error::InvalidInput(format!("config key `{key}` is required"))),
            },
        }
    }

    pub fn u64(&mut self, key: &str, default: Option<u64>) -> Result<u64> {
        let v = self.fetch(key, default.map(Value::from))?;
        v.as_u64().ok_or_else(|| bad(key, "a nonnegative integer", &v))
    }

    pub fn u32(&mut self, key: &str, default: Option<u32>) -> Result<u32> {
        let v = self.u64(key, default.map(u64::from))?;
        u32::try_from(v).map_err(|_| Error::InvalidInput(format!("config key `{key}`: {v} does not fit in 32 bits")))
    }

    pub fn usize(&mut self, key: &str, default: Option<usize>) -> Result<usize> {
        Ok(self.u64(key, default.map(|d| d as u64))? as usize)
    }

    pub fn f64(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        let v = self.fetch(key, default.map(Value::from))?;
        v.as_f64().ok_or_else(|| bad(key, "a number", &v))
    }

    pub fn bool(&mut self, key: &str, default: Option<bool>) -> Result<bool> {
        let v = self.fetch(key, default.map(Value::from))?;
        v.as_bool().ok_or_else(|| bad(key, "true or false", &v))
    }

    pub fn string(&mut self, key: &str, default: Option<&str>) -> Result<String> {
        let v = self.fetch(key, default.map(Value::from))?;
        v.as_str().map(str::to_string).ok_or_else(|| bad(key, "a string", &v))
    }

    pub fn i64_list(&mut self, key: &str, default: Option<Vec<i64>>) -> Result<Vec<i64>> {
        let v = self.fetch(key, default.map(Value::from))?;
        let arr = v.as_array().ok_or_else(|| bad(key, "an array of integers", &v))?;
        arr.iter().map(|x| x.as_i64().ok_or_else(|| bad(key, "an array of integers", &v))).collect()
    }

    pub fn u64_list(&mut self, key: &str, default: Option<Vec<u64>>) -> Result<Vec<u64>> {
        let v = self.fetch(key, default.map(Value::from))?;
        let arr = v.as_array().ok_or_else(|| bad(key, "an array of nonnegative integers", &v))?;
        arr.iter()
            .map(|x| x.as_u64().ok_or_else(|| bad(key, "an array of nonnegative integers", &v)))
            .collect()
    }

    pub fn optional_u64_list(&mut self, key: &str) -> Result<Option<Vec<u64>>> {
        if self.has(key) {
            self.u64_list(key, None).map(Some)
        } else {
            Ok(None)
        }
    }
}
