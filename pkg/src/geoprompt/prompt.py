"""Text prompt serialization for geometric layouts, and the inverse parse.

A layout renders as "An image of {view} camera with {boxes}" where each box
contributes "{class_name} {token_tl} {token_br}" and phrases join with ", ".
When weather or time-of-day attributes are set the article part extends to
"A {weather} {time} image of ...". Box order is shuffled by a seeded RNG
keyed on (seed, image_id) so rebuilding a prompt never depends on global
state or call order. An optional dropout pass replaces the whole prompt with
a null text at rate 0.1, drawn from its own RNG substream so that toggling
dropout on or off leaves the box ordering untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .codec import TokenVocabulary, decode_token, encode_box
from .errors import PromptParseError, PromptTemplateError
from .layout import AnnotatedBox, BBox2D, GeometricLayout, validate_layout
from .seeding import record_rng

#: Default probability that a prompt is replaced by the null text.
DROPOUT_RATE = 0.1

#: Words recognized as time-of-day attributes when parsing the extended
#: template; everything else in the attribute slot reads as weather.
DEFAULT_TIME_WORDS = frozenset({"daytime", "night", "dawn", "dusk"})

_VIEW_SEP = " camera with "
_IMAGE_OF = " image of "


@dataclass(frozen=True)
class PromptOptions:
    shuffle: bool = True
    dropout: bool = False
    dropout_rate: float = DROPOUT_RATE
    null_text: str = ""
    time_words: frozenset[str] = DEFAULT_TIME_WORDS


@dataclass(frozen=True)
class PromptRecord:
    image_id: str
    prompt: str
    order: tuple[int, ...]
    dropped: bool
    seed: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "image_id": self.image_id,
                "prompt": self.prompt,
                "order": list(self.order),
                "dropped": self.dropped,
                "seed": self.seed,
            },
            ensure_ascii=False,
            separators=(", ", ": "),
        )

    @classmethod
    def from_json(cls, line: str) -> "PromptRecord":
        raw = json.loads(line)
        return cls(
            image_id=str(raw["image_id"]),
            prompt=raw["prompt"],
            order=tuple(raw["order"]),
            dropped=bool(raw["dropped"]),
            seed=int(raw["seed"]),
        )


def _article(layout: GeometricLayout) -> str:
    attrs = [a for a in (layout.weather, layout.timeofday) if a]
    if not attrs:
        return "An"
    return "A " + " ".join(attrs)


def render_prompt(layout: GeometricLayout, vocab: TokenVocabulary, order: tuple[int, ...]) -> str:
    if layout.view is None:
        raise PromptTemplateError(f"layout {layout.image_id!r} has no camera view set")
    phrases = ", ".join(
        encode_box(layout.boxes[i], vocab.grid, vocab).render() for i in order
    )
    return f"{_article(layout)}{_IMAGE_OF}{layout.view}{_VIEW_SEP}{phrases}"


def build_prompt(
    layout: GeometricLayout,
    vocab: TokenVocabulary,
    seed: int,
    options: PromptOptions | None = None,
) -> PromptRecord:
    """Serialize one layout; deterministic for fixed (layout, seed, options)."""
    options = options or PromptOptions()
    problems = validate_layout(layout)
    if problems:
        raise PromptTemplateError("; ".join(problems))
    order = tuple(range(len(layout.boxes)))
    if options.shuffle and len(order) > 1:
        shuffled = list(order)
        record_rng(seed, layout.image_id, "order").shuffle(shuffled)
        order = tuple(shuffled)
    dropped = False
    if options.dropout:
        dropped = record_rng(seed, layout.image_id, "dropout").random() < options.dropout_rate
    text = options.null_text if dropped else render_prompt(layout, vocab, order)
    return PromptRecord(str(layout.image_id), text, order, dropped, seed)


def _split_attributes(words: list[str], time_words: frozenset[str]) -> tuple[str | None, str | None]:
    if not words:
        return None, None
    if words[-1] in time_words:
        weather = " ".join(words[:-1]) or None
        return weather, words[-1]
    return " ".join(words), None


def parse_prompt(
    text: str,
    vocab: TokenVocabulary,
    class_table: dict[str, int],
    image_id: str = "",
    time_words: frozenset[str] = DEFAULT_TIME_WORDS,
) -> GeometricLayout:
    """Invert build_prompt: boxes come back at bin-center resolution."""
    head, sep, body = text.partition(_VIEW_SEP)
    if not sep:
        raise PromptParseError(f"missing {_VIEW_SEP!r} separator in {text!r}")
    lead, sep, view = head.partition(_IMAGE_OF)
    if not sep or not view:
        raise PromptParseError(f"missing {_IMAGE_OF.strip()!r} segment in {text!r}")
    if lead == "An":
        weather = timeofday = None
    elif lead.startswith("A ") and len(lead) > 2:
        weather, timeofday = _split_attributes(lead[2:].split(" "), time_words)
    else:
        raise PromptParseError(f"unrecognized prompt prefix {lead!r}")

    boxes: list[AnnotatedBox] = []
    phrases = body.split(", ") if body else []
    for idx, phrase in enumerate(phrases):
        words = phrase.split(" ")
        if len(words) < 3:
            raise PromptParseError(f"phrase {idx} too short: {phrase!r}", phrase_index=idx)
        name = " ".join(words[:-2])
        if name not in class_table:
            raise PromptParseError(f"phrase {idx}: unknown class {name!r}", phrase_index=idx)
        try:
            tl = vocab.parse(words[-2])
            br = vocab.parse(words[-1])
        except Exception as exc:
            raise PromptParseError(f"phrase {idx}: {exc}", phrase_index=idx) from exc
        x1, y1 = decode_token(tl, vocab.grid)
        x2, y2 = decode_token(br, vocab.grid)
        boxes.append(AnnotatedBox(class_table[name], name, BBox2D(x1, y1, x2, y2)))
    return GeometricLayout(
        image_id=image_id,
        width=vocab.grid.width,
        height=vocab.grid.height,
        boxes=tuple(boxes),
        view=view,
        weather=weather,
        timeofday=timeofday,
    )
