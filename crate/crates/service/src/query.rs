use std::collections::BTreeMap;

use tetrascope_core::Params;

use crate::error::ApiError;

/// Decoded query string. Keys of the form `param.<name>` become measure
/// parameters; everything else is a plain field.
#[derive(Debug, Default)]
pub struct QueryArgs {
    fields: BTreeMap<String, String>,
    pub params: Params,
}

impl QueryArgs {
    pub fn parse(pairs: Vec<(String, String)>) -> Result<Self, ApiError> {
        let mut args = QueryArgs::default();
        for (key, value) in pairs {
            if let Some(name) = key.strip_prefix("param.") {
                let v: f64 = value
                    .parse()
                    .map_err(|_| ApiError::bad_request(format!("parameter `{name}` must be a number, got `{value}`")))?;
                args.params.insert(name.to_string(), v);
            } else {
                args.fields.insert(key, value);
            }
        }
        Ok(args)
    }

    pub fn text(&self, key: &str) -> Result<&str, ApiError> {
        self.fields
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| ApiError::bad_request(format!("missing query field `{key}`")))
    }

    pub fn number<T: std::str::FromStr>(&self, key: &str) -> Result<T, ApiError> {
        let raw = self.text(key)?;
        raw.parse()
            .map_err(|_| ApiError::bad_request(format!("query field `{key}` is not a valid number: `{raw}`")))
    }

    pub fn number_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ApiError> {
        if self.fields.contains_key(key) {
            self.number(key)
        } else {
            Ok(default)
        }
    }
}
