/// JSON Schema of the run configuration.
pub const SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "fpk run configuration",
  "type": "object",
  "additionalProperties": false,
  "required": ["model", "initial", "time", "grid", "task"],
  "properties": {
    "model": {
      "type": "object",
      "additionalProperties": false,
      "required": ["n", "k1", "k2", "k3", "epsilon", "kappa"],
      "properties": {
        "n": { "type": "integer", "minimum": 1, "maximum": 3 },
        "k1": { "$ref": "#/$defs/matrix" },
        "k2": { "$ref": "#/$defs/matrix" },
        "k3": { "$ref": "#/$defs/matrix" },
        "epsilon": { "type": "number", "exclusiveMinimum": 0 },
        "kappa": { "type": "number" }
      }
    },
    "initial": {
      "oneOf": [
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["mixture"],
          "properties": {
            "mixture": {
              "type": "object",
              "additionalProperties": false,
              "required": ["weights", "means", "b0", "c0"],
              "properties": {
                "weights": { "type": "array", "items": { "type": "number" }, "minItems": 1 },
                "means": { "type": "array", "items": { "$ref": "#/$defs/vector" } },
                "b0": { "type": "array", "items": { "$ref": "#/$defs/matrix" } },
                "c0": { "type": "array", "items": { "$ref": "#/$defs/matrix" } }
              }
            }
          }
        },
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["sampled"],
          "properties": {
            "sampled": {
              "type": "object",
              "additionalProperties": false,
              "required": ["path"],
              "properties": { "path": { "type": "string", "description": "CSV with header x,u on a uniform grid" } }
            }
          }
        }
      ]
    },
    "time": {
      "type": "object",
      "additionalProperties": false,
      "required": ["s", "t"],
      "properties": {
        "s": { "type": "number" },
        "t": { "type": "number" },
        "snapshots": { "type": "array", "items": { "type": "number" } }
      }
    },
    "grid": {
      "type": "object",
      "additionalProperties": false,
      "required": ["x_min", "x_max", "nx", "dt"],
      "properties": {
        "x_min": { "type": "number" },
        "x_max": { "type": "number" },
        "nx": { "type": "integer", "minimum": 3 },
        "dt": { "type": "number", "exclusiveMinimum": 0 }
      }
    },
    "task": { "enum": ["evolve", "inverse", "symmetry", "verify"] },
    "symmetry": {
      "type": "object",
      "additionalProperties": false,
      "required": ["operator"],
      "properties": {
        "operator": {
          "oneOf": [
            { "enum": ["linsym", "identity"] },
            {
              "type": "object",
              "additionalProperties": false,
              "required": ["a0", "a_lin", "a_grad"],
              "properties": {
                "a0": { "type": "number" },
                "a_lin": { "$ref": "#/$defs/vector" },
                "a_grad": { "$ref": "#/$defs/vector" }
              }
            }
          ]
        },
        "x_gamma_a": { "$ref": "#/$defs/vector" },
        "direction": { "$ref": "#/$defs/vector" }
      }
    },
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "dir": { "type": "string", "default": "out" },
        "snapshots": { "type": "string", "default": "snapshots.csv" },
        "report": { "type": "string", "default": "report.json" },
        "meta": { "type": "string", "default": "run_meta.json" }
      }
    }
  },
  "$defs": {
    "vector": { "type": "array", "items": { "type": "number" } },
    "matrix": { "type": "array", "items": { "type": "number" }, "description": "row-major n*n" }
  }
}
"##;
