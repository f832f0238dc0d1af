"""Strategic Intent Translator - Risk simulator, intent DSL and extraction models."""

__version__ = "0.1.0"
