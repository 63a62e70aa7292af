"""SQuAD-schema parsing and rendering into continuous LM training text.

A corpus is flattened one example per line: the context paragraph, a
delimiter, then its question(s). Three delimiter schemes and two
questions-per-line modes give six formats; answer-aware rendering
additionally tags the answer span inside the context. Segments are joined
with single spaces and training lines never contain a newline.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import ConfigError, ParseError, SchemaError, SpanNotVerifiedError

ANSWER_START_TOKEN = "[ANSS]"
ANSWER_END_TOKEN = "[ANSE]"


class QplMode(str, Enum):
    OQPL = "oqpl"  # context duplicated, one question per line
    AQPL = "aqpl"  # one line per context, all questions appended


class Delimiter(str, Enum):
    ARTIFICIAL = "artificial"          # the [SEP] token
    NATURAL_QUESTION = "question"      # the word Question:
    NATURAL_NUMBER = "number"          # numbered list items 1. 2. ...


@dataclass
class AnswerSpan:
    text: str
    start_char: int          # 0-based Unicode scalar offset into the context
    verified: bool = True


@dataclass
class QAPair:
    question: str
    answers: list[AnswerSpan]


@dataclass
class ContextParagraph:
    id: str
    context: str
    qas: list[QAPair]


@dataclass
class Article:
    title: str
    paragraphs: list[ContextParagraph]


@dataclass
class SpanWarning:
    paragraph_id: str
    question_index: int
    reason: str

    def as_dict(self):
        return {"paragraph_id": self.paragraph_id,
                "question_index": self.question_index,
                "reason": self.reason}


@dataclass
class QADataset:
    articles: list[Article]
    warnings: list[SpanWarning] = field(default_factory=list)

    def paragraphs(self):
        for article in self.articles:
            yield from article.paragraphs

    @property
    def paragraph_count(self):
        return sum(len(a.paragraphs) for a in self.articles)

    @property
    def question_count(self):
        return sum(len(p.qas) for p in self.paragraphs())


@dataclass
class FormatConfig:
    qpl_mode: QplMode = QplMode.OQPL
    delimiter: Delimiter = Delimiter.ARTIFICIAL
    answer_aware: bool = False

    def __post_init__(self):
        self.qpl_mode = QplMode(self.qpl_mode)
        self.delimiter = Delimiter(self.delimiter)
        if self.answer_aware and self.qpl_mode is not QplMode.OQPL:
            raise ConfigError("answer-aware rendering requires OQPL mode")

    def as_dict(self):
        return {"qpl_mode": self.qpl_mode.value,
                "delimiter": self.delimiter.value,
                "answer_aware": self.answer_aware}


@dataclass
class TrainingExample:
    line: str
    source_paragraph_id: str
    source_question_indices: list[int]


def _require(obj, key, path, expected):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing field {path}.{key}", field_path=f"{path}.{key}")
    value = obj[key]
    if not isinstance(value, expected):
        raise SchemaError(
            f"field {path}.{key} has type {type(value).__name__}",
            field_path=f"{path}.{key}",
        )
    return value


def parse_squad(raw: bytes) -> QADataset:
    """Parse SQuAD v1.1-schema JSON bytes into a QADataset.

    Deterministic: paragraph ids are assigned positionally (a<i>-p<j>).
    Answer spans are checked against the context; a mismatched span is kept
    with verified=False and a warning record rather than dropped.
    """
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not UTF-8 at byte {exc.start}",
                         byte_offset=exc.start) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise ParseError(f"malformed JSON at byte {offset}: {exc.msg}",
                         byte_offset=offset) from exc

    data = _require(doc, "data", "$", list)
    articles = []
    warnings = []
    for ai, raw_article in enumerate(data):
        apath = f"$.data[{ai}]"
        paragraphs_raw = _require(raw_article, "paragraphs", apath, list)
        title = raw_article.get("title", "") if isinstance(raw_article, dict) else ""
        paragraphs = []
        for pi, raw_para in enumerate(paragraphs_raw):
            ppath = f"{apath}.paragraphs[{pi}]"
            context = _require(raw_para, "context", ppath, str)
            qas_raw = _require(raw_para, "qas", ppath, list)
            if not context:
                raise SchemaError(f"empty context at {ppath}.context",
                                  field_path=f"{ppath}.context")
            if not qas_raw:
                raise SchemaError(f"paragraph without questions at {ppath}.qas",
                                  field_path=f"{ppath}.qas")
            pid = f"a{ai}-p{pi}"
            qas = []
            for qi, raw_qa in enumerate(qas_raw):
                qpath = f"{ppath}.qas[{qi}]"
                question = _require(raw_qa, "question", qpath, str)
                if not question:
                    raise SchemaError(f"empty question at {qpath}.question",
                                      field_path=f"{qpath}.question")
                answers_raw = _require(raw_qa, "answers", qpath, list)
                answers = []
                for xi, raw_ans in enumerate(answers_raw):
                    xpath = f"{qpath}.answers[{xi}]"
                    a_text = _require(raw_ans, "text", xpath, str)
                    a_start = _require(raw_ans, "answer_start", xpath, int)
                    span = AnswerSpan(text=a_text, start_char=a_start)
                    span.verified = _span_matches(context, span)
                    if not span.verified:
                        warnings.append(SpanWarning(
                            paragraph_id=pid,
                            question_index=qi,
                            reason=(
                                f"answer_start {a_start} does not point at "
                                f"{a_text!r}"
                            ),
                        ))
                    answers.append(span)
                qas.append(QAPair(question=question, answers=answers))
            paragraphs.append(ContextParagraph(id=pid, context=context, qas=qas))
        articles.append(Article(title=title, paragraphs=paragraphs))
    return QADataset(articles=articles, warnings=warnings)


def _span_matches(context, span):
    if span.start_char < 0 or span.start_char + len(span.text) > len(context):
        return False
    return context[span.start_char : span.start_char + len(span.text)] == span.text


def render_delimiter(scheme: Delimiter, question_ordinal: int = 1) -> str:
    """The delimiter text placed between context and question. The ordinal
    only matters for the numbered-list scheme and must be >= 1."""
    if question_ordinal < 1:
        raise ConfigError(f"question ordinal must be >= 1, got {question_ordinal}")
    scheme = Delimiter(scheme)
    if scheme is Delimiter.ARTIFICIAL:
        return "[SEP]"
    if scheme is Delimiter.NATURAL_QUESTION:
        return "Question:"
    return f"{question_ordinal}."


def mark_answer_span(context: str, span: AnswerSpan) -> str:
    """Insert answer-start/answer-end tags around a verified span, leaving
    every other character unchanged (adds exactly 14 characters)."""
    if not span.verified or not _span_matches(context, span):
        raise SpanNotVerifiedError(
            f"span {span.text!r}@{span.start_char} is not verified against "
            "the context; resolve it before tagging"
        )
    end = span.start_char + len(span.text)
    return (
        context[: span.start_char]
        + ANSWER_START_TOKEN + " "
        + span.text
        + " " + ANSWER_END_TOKEN
        + context[end:]
    )


def normalize_line_text(text: str) -> str:
    """Replace literal newlines with single spaces so a rendered example
    always fits on one line."""
    return text.replace("\r\n", " ").replace("\n", " ").replace("\r", " ")


def build_examples(ds: QADataset, cfg: FormatConfig) -> list[TrainingExample]:
    """Render a dataset into training lines under the given format.

    OQPL emits one line per (paragraph, question) pair; AQPL emits one line
    per paragraph with every question appended. Numbered-list ordinals
    count questions within a line and reset across lines. Answer-aware
    rendering tags each question's first answer span in the context.
    """
    examples = []
    for para in ds.paragraphs():
        context = normalize_line_text(para.context)
        if cfg.qpl_mode is QplMode.OQPL:
            for qi, qa in enumerate(para.qas):
                ctx = context
                if cfg.answer_aware:
                    if not qa.answers:
                        raise SpanNotVerifiedError(
                            f"paragraph {para.id} question {qi} has no answer "
                            "span to tag"
                        )
                    span = qa.answers[0]
                    if not span.verified:
                        raise SpanNotVerifiedError(
                            f"paragraph {para.id} question {qi} has an "
                            "unverified answer span; cannot tag"
                        )
                    ctx = normalize_line_text(mark_answer_span(para.context, span))
                delim = render_delimiter(cfg.delimiter, 1)
                line = f"{ctx} {delim} {normalize_line_text(qa.question)}"
                examples.append(TrainingExample(
                    line=line,
                    source_paragraph_id=para.id,
                    source_question_indices=[qi],
                ))
        else:
            parts = [context]
            for qi, qa in enumerate(para.qas):
                parts.append(render_delimiter(cfg.delimiter, qi + 1))
                parts.append(normalize_line_text(qa.question))
            examples.append(TrainingExample(
                line=" ".join(parts),
                source_paragraph_id=para.id,
                source_question_indices=list(range(len(para.qas))),
            ))
    return examples


def render_prompt(context: str, cfg: FormatConfig,
                  span: AnswerSpan | None = None) -> str:
    """Context plus a trailing delimiter: the input shape that invokes
    question generation. With answer-aware configs the span to tag must be
    supplied."""
    ctx = context
    if cfg.answer_aware:
        if span is None:
            raise ConfigError("answer-aware prompts need an answer span")
        ctx = mark_answer_span(context, span)
    ctx = normalize_line_text(ctx)
    return f"{ctx} {render_delimiter(cfg.delimiter, 1)}"


def emit_lm_text(examples, destination) -> int:
    """Write one example per line (newline-terminated, UTF-8) and return
    the byte count. Accepts a path or a binary file object."""
    payload = "".join(ex.line + "\n" for ex in examples).encode("utf-8")
    if hasattr(destination, "write"):
        destination.write(payload)
    else:
        try:
            Path(destination).write_bytes(payload)
        except OSError as exc:
            raise OSError(f"cannot write LM text to {destination}: {exc}") from exc
    return len(payload)
