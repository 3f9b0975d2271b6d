"""Run configuration: one INI file with a section per module.

Every knob has the documented default, so an empty (or absent) file is
a valid configuration. CLI flags override file values.
"""

from __future__ import annotations

import configparser
from dataclasses import replace
from pathlib import Path

from .agents import DEFAULT_PROMPT_DIR, EngineSettings, PipelineConfig
from .alignment import AlignmentConfig, LexicalOverlap
from .embedding import DeterministicMock, EncoderKind, EncoderProfile
from .extraction import ExtractorConfig, RuleBased, Sidecar
from .llm_gateway import GatewayConfig, RemoteLlm, RuleMock, ScriptedMock
from .remote import RemoteService
from .retrieval import RetrievalConfig


def _visual_extractor(name: str, endpoint: str):
    if name == "sidecar":
        return Sidecar()
    if name == "remote":
        return RemoteService(endpoint)
    raise ValueError(f"unknown visual extraction provider {name!r}")


def _textual_extractor(name: str, endpoint: str):
    if name == "sidecar":
        return Sidecar()
    if name == "rule_based":
        return RuleBased()
    if name == "remote":
        return RemoteService(endpoint)
    raise ValueError(f"unknown textual extraction provider {name!r}")


def _scorer(name: str, endpoint: str):
    if name == "lexical_overlap":
        return LexicalOverlap()
    if name == "remote":
        return RemoteService(endpoint)
    raise ValueError(f"unknown alignment scorer {name!r}")


def _encoder_provider(name: str, seed: int, endpoint: str):
    if name == "mock":
        return DeterministicMock(seed=seed)
    if name == "remote":
        return RemoteService(endpoint)
    raise ValueError(f"unknown encoder provider {name!r}")


def parse_gateway_provider(spec: str, parser: configparser.ConfigParser | None = None):
    """Parse a gateway provider spec: rule_mock, scripted:<path> or remote."""
    if spec == "rule_mock":
        return RuleMock()
    if spec.startswith("scripted:"):
        return ScriptedMock(script_path=spec.split(":", 1)[1])
    if spec == "scripted":
        if parser is None or not parser.get("gateway", "script", fallback=""):
            raise ValueError("scripted gateway provider needs a script path")
        return ScriptedMock(script_path=parser.get("gateway", "script"))
    if spec == "remote":
        if parser is None:
            raise ValueError("remote gateway provider needs endpoint and model from the config file")
        return RemoteLlm(
            endpoint=parser.get("gateway", "endpoint", fallback=""),
            model=parser.get("gateway", "model", fallback=""),
            credential_env=parser.get("gateway", "credential_env", fallback=""),
        )
    raise ValueError(f"unknown gateway provider {spec!r}")


def load_config(path: str | Path | None) -> tuple[EngineSettings, GatewayConfig]:
    """Read settings and gateway config from an INI file (or defaults)."""
    parser = configparser.ConfigParser()
    if path is not None:
        read = parser.read(str(path), encoding="utf-8")
        if not read:
            raise FileNotFoundError(f"config file {path} not found")

    def get(section: str, key: str, fallback: str) -> str:
        return parser.get(section, key, fallback=fallback)

    def getfloat(section: str, key: str, fallback: float) -> float:
        return parser.getfloat(section, key, fallback=fallback)

    def getint(section: str, key: str, fallback: int) -> int:
        return parser.getint(section, key, fallback=fallback)

    def getbool(section: str, key: str, fallback: bool) -> bool:
        return parser.getboolean(section, key, fallback=fallback)

    extractor = ExtractorConfig(
        visual_provider=_visual_extractor(
            get("extraction", "visual_provider", "sidecar"),
            get("extraction", "visual_endpoint", ""),
        ),
        textual_provider=_textual_extractor(
            get("extraction", "textual_provider", "rule_based"),
            get("extraction", "textual_endpoint", ""),
        ),
        min_confidence=getfloat("extraction", "min_confidence", 0.0),
    )
    aligner = AlignmentConfig(
        scorer=_scorer(get("alignment", "scorer", "lexical_overlap"), get("alignment", "endpoint", "")),
        threshold=getfloat("alignment", "tau", 0.5),
    )
    seed = getint("embedding", "seed", 0)
    visual_profile = EncoderProfile(
        kind=EncoderKind.VISUAL,
        provider=_encoder_provider(
            get("embedding", "visual_provider", "mock"), seed, get("embedding", "visual_endpoint", "")
        ),
        dim=getint("embedding", "visual_dim", 64),
    )
    textual_profile = EncoderProfile(
        kind=EncoderKind.TEXT,
        provider=_encoder_provider(
            get("embedding", "textual_provider", "mock"), seed, get("embedding", "textual_endpoint", "")
        ),
        dim=getint("embedding", "textual_dim", 64),
    )
    retrieval = RetrievalConfig(
        k=getint("retrieval", "k", 2),
        exclude_self=getbool("retrieval", "exclude_self", True),
    )
    pipeline = PipelineConfig(
        use_retrieval_agent=getbool("agents", "use_retrieval_agent", True),
        use_detective_agent=getbool("agents", "use_detective_agent", True),
        use_event_evidence=getbool("agents", "use_event_evidence", True),
        use_entity_evidence=getbool("agents", "use_entity_evidence", True),
    )
    settings = EngineSettings(
        extractor=extractor,
        aligner=aligner,
        visual_profile=visual_profile,
        textual_profile=textual_profile,
        retrieval=retrieval,
        pipeline=pipeline,
        prompt_dir=get("agents", "prompt_dir", str(DEFAULT_PROMPT_DIR)),
        send_image=getbool("agents", "send_image", True),
        temperature=getfloat("agents", "temperature", 0.6),
        max_tokens=getint("agents", "max_tokens", 4096),
    )
    gateway = GatewayConfig(
        provider=parse_gateway_provider(get("gateway", "provider", "rule_mock"), parser),
        max_attempts=getint("gateway", "max_attempts", 3),
        backoff_base=getfloat("gateway", "backoff_base", 0.5),
        cache_dir=get("gateway", "cache_dir", "") or None,
        rate_limit=getint("gateway", "rate_limit", 4),
    )
    return settings, gateway


def apply_overrides(
    settings: EngineSettings,
    gateway: GatewayConfig,
    tau: float | None = None,
    k: int | None = None,
    provider: str | None = None,
    cache_dir: str | None = None,
) -> tuple[EngineSettings, GatewayConfig]:
    """Apply CLI flag overrides on top of file-derived configuration."""
    if tau is not None:
        settings = replace(settings, aligner=replace(settings.aligner, threshold=tau))
    if k is not None:
        settings = replace(settings, retrieval=replace(settings.retrieval, k=k))
    if provider is not None:
        gateway = replace(gateway, provider=parse_gateway_provider(provider))
    if cache_dir is not None:
        gateway = replace(gateway, cache_dir=cache_dir)
    return settings, gateway
