"""The three-stage reasoning pipeline: retrieval check, element-by-element
detective pass, and the analyst that emits the final verdict.

Each stage is one gateway call over a versioned prompt template
(``prompts/``, overridable per run). Stage outputs follow a structured
text contract: the retrieval stage reports under a ``FLAGS:`` heading,
the detective answers one ``ELEMENT <name>: <status> — <note>``
line per element (time, place, person, event, object), and the analyst
must end with ``VERDICT: OOC`` or ``VERDICT: PRISTINE``. An analyst
response without a verdict line gets exactly one repair re-prompt
before the run fails.

The rule-based offline mock (see rule_mock) closes the loop for tests:
its verdict is OOC exactly when some detective element is contradicted,
which in turn happens exactly when the retrieval stage raised a flag.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .alignment import AlignmentConfig
from .corpus import NewsItem
from .embedding import EncoderKind, EncoderProfile, encode_event
from .errors import UnparseableVerdict, UnverifiedEvidence
from .extraction import ExtractorConfig
from .llm_gateway import (
    DEFAULT_MAX_TOKENS,
    DEFAULT_TEMPERATURE,
    ChatRequest,
    LlmGateway,
    request_digest,
)
from .retrieval import (
    EvidenceSet,
    QueryBundle,
    RetrievalConfig,
    aggregate,
    build_queries,
    retrieve,
    verify,
)
from .stage_format import parse_element_checks, parse_flags, split_verdict
from .vector_index import VectorIndex

DEFAULT_PROMPT_DIR = Path(__file__).parent / "prompts"


@dataclass(frozen=True)
class PipelineConfig:
    """Which optional stages run and which evidence lists reach the prompts.

    The analyst always runs. With both evidence flags off the pipeline
    performs no retrieval at all (direct judgment).
    """

    use_retrieval_agent: bool = True
    use_detective_agent: bool = True
    use_event_evidence: bool = True
    use_entity_evidence: bool = True

    def to_record(self) -> dict[str, bool]:
        return {
            "use_retrieval_agent": self.use_retrieval_agent,
            "use_detective_agent": self.use_detective_agent,
            "use_event_evidence": self.use_event_evidence,
            "use_entity_evidence": self.use_entity_evidence,
        }


def ablation_rows() -> tuple[PipelineConfig, ...]:
    """The six stage/evidence combinations exercised by the ablation sweep."""
    return (
        PipelineConfig(False, False, False, False),
        PipelineConfig(False, False, True, True),
        PipelineConfig(False, True, True, True),
        PipelineConfig(True, False, True, True),
        PipelineConfig(True, True, True, False),
        PipelineConfig(True, True, True, True),
    )


@dataclass(frozen=True)
class IndexBundle:
    visual: VectorIndex
    textual: VectorIndex
    event: VectorIndex


@dataclass(frozen=True)
class StageRecord:
    stage: str
    prompt_digest: str
    prompt_text: str
    response_text: str
    parsed: tuple[tuple[str, str], ...] = ()

    def to_record(self) -> dict[str, object]:
        return {
            "stage": self.stage,
            "prompt_digest": self.prompt_digest,
            "prompt_text": self.prompt_text,
            "response_text": self.response_text,
            "parsed": dict(self.parsed),
        }


@dataclass(frozen=True)
class RetrievalFindings:
    flagged_inconsistencies: tuple[str, ...]
    stage_raw: str
    record: StageRecord


@dataclass(frozen=True)
class DetectiveFindings:
    element_checks: tuple[tuple[str, tuple[str, str]], ...]  # name -> (status, note)
    stage_raw: str
    record: StageRecord

    @property
    def checks(self) -> dict[str, tuple[str, str]]:
        return dict(self.element_checks)

    def any_contradicted(self) -> bool:
        return any(status == "contradicted" for status, _ in self.checks.values())


@dataclass(frozen=True)
class Verdict:
    c_ooc: int
    explanation: str
    trace: tuple[StageRecord, ...]
    config_used: PipelineConfig

    def __post_init__(self) -> None:
        if self.c_ooc not in (0, 1):
            raise ValueError("c_ooc must be 0 or 1")
        if not self.explanation:
            raise ValueError("explanation must be non-empty")

    def to_record(self) -> dict[str, object]:
        return {
            "c_ooc": self.c_ooc,
            "explanation": self.explanation,
            "trace": [record.to_record() for record in self.trace],
            "config_used": self.config_used.to_record(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, ensure_ascii=False, indent=2)


class PromptTemplates:
    """Named prompt templates loaded from a directory of .txt files."""

    def __init__(self, directory: str | Path = DEFAULT_PROMPT_DIR):
        self.directory = Path(directory)
        self._cache: dict[str, str] = {}

    def get(self, name: str) -> str:
        if name not in self._cache:
            self._cache[name] = (self.directory / f"{name}.txt").read_text(encoding="utf-8")
        return self._cache[name]


@dataclass(frozen=True)
class EngineSettings:
    """Everything one detection run needs apart from the gateway itself."""

    extractor: ExtractorConfig = ExtractorConfig()
    aligner: AlignmentConfig = AlignmentConfig()
    visual_profile: EncoderProfile = EncoderProfile(kind=EncoderKind.VISUAL)
    textual_profile: EncoderProfile = EncoderProfile(kind=EncoderKind.TEXT)
    retrieval: RetrievalConfig = RetrievalConfig()
    pipeline: PipelineConfig = PipelineConfig()
    prompt_dir: str = str(DEFAULT_PROMPT_DIR)
    send_image: bool = True
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS

    def templates(self) -> PromptTemplates:
        return PromptTemplates(self.prompt_dir)


def render_evidence(evidence: EvidenceSet, cfg: PipelineConfig) -> str:
    """Serialize a verified evidence set into the prompt block.

    One line per hit in visual, textual, event order; entity lists
    render only when use_entity_evidence, event hits only when
    use_event_evidence. Empty when both flags are off.
    """
    if not evidence.verified:
        raise UnverifiedEvidence("evidence must be verified before rendering")
    lines: list[str] = []
    for granularity, hits in evidence.lists():
        if granularity.label in ("visual", "textual") and not cfg.use_entity_evidence:
            continue
        if granularity.label == "event" and not cfg.use_event_evidence:
            continue
        for hit in hits:
            lines.append(
                f"[{granularity.label}] source={hit.source_news_id} "
                f"dist={hit.distance:.4f} :: {hit.payload}"
            )
    return "\n".join(lines)


SYSTEM_PROMPT = "You verify whether news captions truthfully describe their images."


def _image_note(item: NewsItem, send_image: bool) -> str:
    if send_image and item.image_ref:
        return f"attached ({item.image_ref})"
    return "(not provided to this stage)"


def _stage_request(
    stage: str,
    prompt: str,
    item: NewsItem,
    settings: EngineSettings,
) -> ChatRequest:
    image_refs = (item.image_ref,) if settings.send_image and item.image_ref else ()
    return ChatRequest(
        system_prompt=SYSTEM_PROMPT,
        user_messages=(prompt,),
        temperature=settings.temperature,
        max_tokens=settings.max_tokens,
        image_refs=image_refs,
        metadata=(("sample", item.id), ("stage", stage)),
    )


def _call(
    stage: str,
    prompt: str,
    item: NewsItem,
    settings: EngineSettings,
    gateway: LlmGateway,
) -> StageRecord:
    request = _stage_request(stage, prompt, item, settings)
    response = gateway.complete(request)
    return StageRecord(
        stage=stage,
        prompt_digest=request_digest(request),
        prompt_text=prompt,
        response_text=response.text,
    )


def run_retrieval_agent(
    item: NewsItem,
    evidence_text: str,
    gateway: LlmGateway,
    settings: EngineSettings,
) -> RetrievalFindings:
    prompt = settings.templates().get("retrieval").format(
        caption=item.caption,
        image_note=_image_note(item, settings.send_image),
        evidence_block=evidence_text,
    )
    record = _call("retrieval", prompt, item, settings, gateway)
    flags = parse_flags(record.response_text)
    record = replace(record, parsed=(("flags", json.dumps(flags, ensure_ascii=False)),))
    return RetrievalFindings(
        flagged_inconsistencies=tuple(flags),
        stage_raw=record.response_text,
        record=record,
    )


def run_detective_agent(
    item: NewsItem,
    evidence_text: str,
    prior: RetrievalFindings | None,
    gateway: LlmGateway,
    settings: EngineSettings,
) -> DetectiveFindings:
    prior_block = prior.stage_raw if prior is not None else "(none)"
    prompt = settings.templates().get("detective").format(
        caption=item.caption,
        image_note=_image_note(item, settings.send_image),
        evidence_block=evidence_text,
        prior_findings=prior_block,
    )
    record = _call("detective", prompt, item, settings, gateway)
    checks = parse_element_checks(record.response_text)
    record = replace(
        record,
        parsed=(("element_checks", json.dumps(checks, sort_keys=True, ensure_ascii=False)),),
    )
    return DetectiveFindings(
        element_checks=tuple((name, checks[name]) for name in sorted(checks)),
        stage_raw=record.response_text,
        record=record,
    )


def _prior_block(
    retrieval_findings: RetrievalFindings | None,
    detective_findings: DetectiveFindings | None,
) -> str:
    sections: list[str] = []
    if retrieval_findings is not None:
        sections.append(f"[retrieval]\n{retrieval_findings.stage_raw}")
    if detective_findings is not None:
        sections.append(f"[detective]\n{detective_findings.stage_raw}")
    return "\n\n".join(sections) if sections else "(none)"


def run_analyst_agent(
    item: NewsItem,
    evidence_text: str,
    retrieval_findings: RetrievalFindings | None,
    detective_findings: DetectiveFindings | None,
    gateway: LlmGateway,
    settings: EngineSettings,
    config_used: PipelineConfig,
    earlier_trace: tuple[StageRecord, ...] = (),
) -> Verdict:
    templates = settings.templates()
    prompt = templates.get("analyst").format(
        caption=item.caption,
        image_note=_image_note(item, settings.send_image),
        evidence_block=evidence_text,
        prior_findings=_prior_block(retrieval_findings, detective_findings),
    )
    record = _call("analyst", prompt, item, settings, gateway)
    trace = list(earlier_trace) + [record]
    parsed = split_verdict(record.response_text)
    if parsed is None:
        repair_prompt = templates.get("analyst_repair").format(previous=record.response_text)
        repair_record = _call("analyst-repair", repair_prompt, item, settings, gateway)
        trace.append(repair_record)
        parsed = split_verdict(repair_record.response_text)
        if parsed is None:
            raise UnparseableVerdict(
                f"no verdict line for item {item.id!r} after one repair attempt"
            )
    c_ooc, explanation = parsed
    if not explanation:
        # A bare verdict line still satisfies the non-empty explanation
        # contract: fall back to the verbatim response.
        explanation = trace[-1].response_text.strip()
    return Verdict(
        c_ooc=c_ooc,
        explanation=explanation,
        trace=tuple(trace),
        config_used=config_used,
    )


def gather_evidence(
    item: NewsItem,
    indices: IndexBundle,
    settings: EngineSettings,
) -> EvidenceSet:
    """Build queries, retrieve per enabled granularity and verify.

    With both evidence flags off no retrieval happens at all and the
    result is an empty verified set.
    """
    cfg = settings.pipeline
    if not cfg.use_event_evidence and not cfg.use_entity_evidence:
        return EvidenceSet(verified=True)
    if cfg.use_entity_evidence:
        bundle = build_queries(
            item, settings.extractor, settings.aligner,
            settings.visual_profile, settings.textual_profile,
        )
    else:
        bundle = QueryBundle(
            visual_queries=(),
            textual_queries=(),
            event_query=encode_event(item.caption, settings.textual_profile),
        )
    visual_hits, textual_hits, event_hits = retrieve(
        bundle, indices.visual, indices.textual, indices.event,
        settings.retrieval, self_id=item.id,
    )
    if not cfg.use_event_evidence:
        event_hits = ()
    return verify(aggregate(visual_hits, textual_hits, event_hits))


def run_pipeline(
    item: NewsItem,
    indices: IndexBundle,
    settings: EngineSettings,
    gateway: LlmGateway,
) -> Verdict:
    verdict, _ = run_pipeline_with_evidence(item, indices, settings, gateway)
    return verdict


def run_pipeline_with_evidence(
    item: NewsItem,
    indices: IndexBundle,
    settings: EngineSettings,
    gateway: LlmGateway,
) -> tuple[Verdict, EvidenceSet]:
    """Full stage sequence over one item; disabled stages are skipped."""
    cfg = settings.pipeline
    evidence = gather_evidence(item, indices, settings)
    evidence_text = render_evidence(evidence, cfg)

    trace: list[StageRecord] = []
    retrieval_findings: RetrievalFindings | None = None
    detective_findings: DetectiveFindings | None = None
    if cfg.use_retrieval_agent:
        retrieval_findings = run_retrieval_agent(item, evidence_text, gateway, settings)
        trace.append(retrieval_findings.record)
    if cfg.use_detective_agent:
        detective_findings = run_detective_agent(
            item, evidence_text, retrieval_findings, gateway, settings
        )
        trace.append(detective_findings.record)
    verdict = run_analyst_agent(
        item,
        evidence_text,
        retrieval_findings,
        detective_findings,
        gateway,
        settings,
        config_used=cfg,
        earlier_trace=tuple(trace),
    )
    return verdict, evidence
