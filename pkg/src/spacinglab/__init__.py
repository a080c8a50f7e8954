"""spacinglab: numerical laboratory for level-spacing laws, entropy
functionals, maximum-entropy fits, and spacing-related diffusions."""

__version__ = "0.1.0"
