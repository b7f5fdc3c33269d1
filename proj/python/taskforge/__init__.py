"""Multi-hop web task generation over crawled site graphs."""

from ._core import (
    Config,
    ForgeError,
    Pipeline,
    SiteGraph,
    canonicalize_url,
    parse_response,
    render_response,
    sha256_hex,
)

__all__ = [
    "Config",
    "ForgeError",
    "Pipeline",
    "SiteGraph",
    "canonicalize_url",
    "parse_response",
    "render_response",
    "sha256_hex",
]
