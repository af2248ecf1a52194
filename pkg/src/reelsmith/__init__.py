"""Theme-to-timeline film production pipeline with retrieval-backed camera planning,
audience-driven editing, multi-scale sound design, and OTIO export."""

__version__ = "0.1.0"
