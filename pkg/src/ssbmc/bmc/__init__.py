"""SAT-based quantization-error checking."""
