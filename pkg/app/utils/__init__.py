"""Utility modules package."""

from app.utils.logger import LoggerMixin, get_logger, setup_logging

__all__ = ["LoggerMixin", "get_logger", "setup_logging"]
