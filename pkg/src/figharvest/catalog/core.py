"""Catalog data model, ingestion, search, and statistics.

Papers are keyed by DOI, images by image_id with a (doi, in_paper_index)
uniqueness constraint. Search is pure filtering over an inverted token
index plus facet checks; results always come back in canonical
proceedings order (year, proceedings_order, in_paper_index). There is no
relevance scoring on purpose.
"""

import csv
import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence, Union

from figharvest.interchange import iter_jsonl

PathLike = Union[str, Path]

VENUES = ("Vis", "SciVis", "InfoVis", "VAST")


class CatalogError(ValueError):
    """Malformed catalog input."""


class ImageType(str, Enum):
    FIGURE = "F"
    TABLE = "T"

    def __str__(self) -> str:
        return self.value


class TermMode(str, Enum):
    AUTHOR_KEYWORDS = "author_keywords"
    TITLE_AND_ABSTRACT = "title_and_abstract"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class CatalogConfig:
    year_min: int = 1990
    year_max: int = 2019
    stemming: bool = False


@dataclass(frozen=True, slots=True)
class PaperRecord:
    doi: str
    title: str
    abstract: str
    authors: tuple[str, ...]
    author_keywords: tuple[str, ...]
    venue: str
    year: int
    page_count: int
    proceedings_order: int

    def to_record(self) -> dict[str, Any]:
        return {
            "doi": self.doi,
            "title": self.title,
            "abstract": self.abstract,
            "authors": list(self.authors),
            "author_keywords": list(self.author_keywords),
            "venue": self.venue,
            "year": self.year,
            "page_count": self.page_count,
            "proceedings_order": self.proceedings_order,
        }


@dataclass(frozen=True, slots=True)
class ImageRecord:
    image_id: str
    doi: str
    type: ImageType
    thumbnail_ref: str
    fullres_ref: str
    caption: Optional[str]
    in_paper_index: int
    curation_ref: Optional[str] = None
    color_plate_duplicate: bool = False

    def to_record(self) -> dict[str, Any]:
        return {
            "image_id": self.image_id,
            "doi": self.doi,
            "type": self.type.value,
            "thumbnail_ref": self.thumbnail_ref,
            "fullres_ref": self.fullres_ref,
            "caption": self.caption,
            "in_paper_index": self.in_paper_index,
            "curation_ref": self.curation_ref,
            "color_plate_duplicate": self.color_plate_duplicate,
        }


@dataclass(frozen=True, slots=True)
class Query:
    """Conjunction of facets; None / 'both' facets are inactive."""

    terms: Optional[str] = None
    term_mode: TermMode = TermMode.TITLE_AND_ABSTRACT
    authors: Optional[str] = None
    venues: Optional[frozenset[str]] = None
    year_range: Optional[tuple[int, int]] = None
    image_type: str = "both"

    def __post_init__(self) -> None:
        if self.year_range is not None and self.year_range[0] > self.year_range[1]:
            raise ValueError(f"year_range not well-ordered: {self.year_range}")
        if self.image_type not in ("figure", "table", "both"):
            raise ValueError(f"image_type must be figure/table/both, got {self.image_type!r}")
        if self.venues is not None:
            unknown = set(self.venues) - set(VENUES)
            if unknown:
                raise ValueError(f"unknown venues: {sorted(unknown)}")


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _light_stem(token: str) -> str:
    """Very small suffix stripper, only used when stemming is enabled."""
    for suffix in ("ing", "ies", "ed", "es", "s"):
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    return token


def _author_tokens(name: str) -> list[str]:
    return tokenize(name)


def _token_pair_ok(q: str, a: str) -> bool:
    if q == a:
        return True
    # An initial matches the full name it abbreviates, in either direction.
    if len(q) == 1 and a.startswith(q):
        return True
    if len(a) == 1 and q.startswith(a):
        return True
    return False


def _author_name_matches(query_tokens: Sequence[str], author_tokens: Sequence[str]) -> bool:
    """True when every query token pairs with a distinct author token."""
    if len(query_tokens) > len(author_tokens):
        return False
    used = [False] * len(author_tokens)

    def backtrack(i: int) -> bool:
        if i == len(query_tokens):
            return True
        for j, a in enumerate(author_tokens):
            if not used[j] and _token_pair_ok(query_tokens[i], a):
                used[j] = True
                if backtrack(i + 1):
                    return True
                used[j] = False
        return False

    return backtrack(0)


@dataclass(slots=True)
class IngestReport:
    n_papers: int = 0
    n_images: int = 0
    warnings: list[str] = field(default_factory=list)
    rejected_images: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "n_papers": self.n_papers,
            "n_images": self.n_images,
            "warnings": list(self.warnings),
            "rejected_images": list(self.rejected_images),
        }


class Catalog:
    """Immutable-after-build index over papers and images."""

    def __init__(self, papers: dict[str, PaperRecord],
                 images: dict[str, ImageRecord],
                 config: CatalogConfig):
        self.papers = papers
        self.images = images
        self.config = config
        self._images_by_doi: dict[str, list[ImageRecord]] = {}
        for img in images.values():
            self._images_by_doi.setdefault(img.doi, []).append(img)
        for doi in self._images_by_doi:
            self._images_by_doi[doi].sort(key=lambda im: im.in_paper_index)
        self._ta_index: dict[str, set[str]] = {}
        self._kw_index: dict[str, set[str]] = {}
        self._author_token_lists: dict[str, list[list[str]]] = {}
        for doi, paper in papers.items():
            for tok in set(self._index_tokens(f"{paper.title} {paper.abstract}")):
                self._ta_index.setdefault(tok, set()).add(doi)
            for tok in set(self._index_tokens(" ".join(paper.author_keywords))):
                self._kw_index.setdefault(tok, set()).add(doi)
            self._author_token_lists[doi] = [_author_tokens(a) for a in paper.authors]

    def _index_tokens(self, text: str) -> list[str]:
        toks = tokenize(text)
        if self.config.stemming:
            toks = [_light_stem(t) for t in toks]
        return toks

    def images_for(self, doi: str) -> list[ImageRecord]:
        return list(self._images_by_doi.get(doi, []))

    def _matching_dois(self, q: Query) -> set[str]:
        dois = set(self.papers.keys())
        if q.terms:
            tokens = self._index_tokens(q.terms)
            index = (self._kw_index if q.term_mode == TermMode.AUTHOR_KEYWORDS
                     else self._ta_index)
            for tok in tokens:
                dois &= index.get(tok, set())
                if not dois:
                    return dois
        if q.authors:
            query_tokens = _author_tokens(q.authors)
            dois = {doi for doi in dois
                    if any(_author_name_matches(query_tokens, atoks)
                           for atoks in self._author_token_lists[doi])}
        if q.venues is not None:
            dois = {doi for doi in dois if self.papers[doi].venue in q.venues}
        if q.year_range is not None:
            lo, hi = q.year_range
            dois = {doi for doi in dois if lo <= self.papers[doi].year <= hi}
        return dois

    def search(self, q: Query) -> list[ImageRecord]:
        """All images of papers passing every facet, in canonical order."""
        dois = self._matching_dois(q)
        out: list[ImageRecord] = []
        for doi in dois:
            for img in self._images_by_doi.get(doi, []):
                if q.image_type == "figure" and img.type != ImageType.FIGURE:
                    continue
                if q.image_type == "table" and img.type != ImageType.TABLE:
                    continue
                out.append(img)
        out.sort(key=lambda im: (self.papers[im.doi].year,
                                 self.papers[im.doi].proceedings_order,
                                 im.doi, im.in_paper_index))
        return out

    def stats(self) -> dict[str, Any]:
        """Counts per year/venue plus totals.

        Color-plate duplicate images are excluded from every count, and
        average images per page is images divided by summed page counts.
        """
        cells: dict[tuple[int, str], dict[str, Any]] = {}
        for paper in self.papers.values():
            cell = cells.setdefault((paper.year, paper.venue), {
                "year": paper.year, "venue": paper.venue,
                "papers": 0, "pages": 0, "images": 0, "figures": 0, "tables": 0,
            })
            cell["papers"] += 1
            cell["pages"] += paper.page_count
        counted = [img for img in self.images.values() if not img.color_plate_duplicate]
        for img in counted:
            paper = self.papers[img.doi]
            cell = cells[(paper.year, paper.venue)]
            cell["images"] += 1
            if img.type == ImageType.FIGURE:
                cell["figures"] += 1
            else:
                cell["tables"] += 1
        for cell in cells.values():
            cell["avg_images_per_page"] = (cell["images"] / cell["pages"]
                                           if cell["pages"] > 0 else 0.0)
        by_venue = {v: 0 for v in VENUES}
        by_year: dict[int, int] = {}
        for (year, venue), cell in cells.items():
            by_venue[venue] += cell["images"]
            by_year[year] = by_year.get(year, 0) + cell["images"]
        figures = sum(1 for img in counted if img.type == ImageType.FIGURE)
        tables = len(counted) - figures
        total_pages = sum(p.page_count for p in self.papers.values())
        return {
            "totals": {
                "papers": len(self.papers),
                "images": len(counted),
                "figures": figures,
                "tables": tables,
                "pages": total_pages,
                "avg_images_per_page": len(counted) / total_pages if total_pages else 0.0,
            },
            "by_venue": by_venue,
            "by_year": {str(y): by_year[y] for y in sorted(by_year)},
            "cells": [cells[key] for key in sorted(cells.keys())],
        }

    def digest(self) -> str:
        """Content hash; identical inputs ingest to an identical digest."""
        payload = {
            "papers": [self.papers[doi].to_record() for doi in sorted(self.papers)],
            "images": [self.images[iid].to_record() for iid in sorted(self.images)],
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _split_multi(raw: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in raw.split(";") if part.strip())


def _iter_records(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Line-numbered records from a .csv or line-delimited JSON file."""
    if path.suffix.lower() == ".csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for i, row in enumerate(reader, start=2):
                yield i, {k: v for k, v in row.items() if k is not None}
    else:
        yield from iter_jsonl(path)


def _parse_paper(rec: dict[str, Any], ctx: str, config: CatalogConfig) -> PaperRecord:
    try:
        authors = rec["authors"]
        if isinstance(authors, str):
            authors = _split_multi(authors)
        keywords = rec.get("author_keywords", ())
        if isinstance(keywords, str):
            keywords = _split_multi(keywords)
        paper = PaperRecord(
            doi=str(rec["doi"]).strip(),
            title=str(rec.get("title", "")),
            abstract=str(rec.get("abstract", "")),
            authors=tuple(str(a) for a in authors),
            author_keywords=tuple(str(k) for k in keywords),
            venue=str(rec["venue"]).strip(),
            year=int(rec["year"]),
            page_count=int(rec["page_count"]),
            proceedings_order=int(rec["proceedings_order"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CatalogError(f"{ctx}: malformed paper record: {exc}") from exc
    if not paper.doi:
        raise CatalogError(f"{ctx}: empty doi")
    if paper.venue not in VENUES:
        raise CatalogError(f"{ctx}: unknown venue {paper.venue!r} (expected one of {VENUES})")
    if not config.year_min <= paper.year <= config.year_max:
        raise CatalogError(f"{ctx}: year {paper.year} outside "
                           f"[{config.year_min}, {config.year_max}]")
    if paper.page_count < 1:
        raise CatalogError(f"{ctx}: page_count must be positive, got {paper.page_count}")
    return paper


def _parse_image(rec: dict[str, Any], ctx: str) -> ImageRecord:
    try:
        raw_type = str(rec["type"]).strip()
        img_type = ImageType(raw_type) if raw_type in ("F", "T") else ImageType[raw_type.upper()]
        dup = rec.get("color_plate_duplicate", False)
        if isinstance(dup, str):
            dup = dup.strip().lower() in ("1", "true", "yes")
        return ImageRecord(
            image_id=str(rec["image_id"]).strip(),
            doi=str(rec["doi"]).strip(),
            type=img_type,
            thumbnail_ref=str(rec.get("thumbnail_ref", "")),
            fullres_ref=str(rec.get("fullres_ref", "")),
            caption=(str(rec["caption"]) if rec.get("caption") else None),
            in_paper_index=int(rec["in_paper_index"]),
            curation_ref=(str(rec["curation_ref"]) if rec.get("curation_ref") else None),
            color_plate_duplicate=bool(dup),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CatalogError(f"{ctx}: malformed image record: {exc}") from exc


def ingest(papers_path: PathLike, images_path: PathLike,
           config: Optional[CatalogConfig] = None) -> tuple[Catalog, IngestReport]:
    """Build a catalog from a papers file and an images file.

    Duplicate DOIs are last-write-wins with a warning; images whose DOI
    is unknown or that collide on (doi, in_paper_index) or image_id are
    rejected and listed in the report. Venue/era mismatches (SciVis
    before 2013, Vis after 2012) are lint warnings only.
    """
    config = config or CatalogConfig()
    papers_path, images_path = Path(papers_path), Path(images_path)
    report = IngestReport()

    papers: dict[str, PaperRecord] = {}
    for line_no, rec in _iter_records(papers_path):
        ctx = f"{papers_path}:{line_no}"
        paper = _parse_paper(rec, ctx, config)
        if paper.doi in papers:
            report.warnings.append(f"{ctx}: duplicate doi '{paper.doi}', keeping latest")
        if paper.venue == "SciVis" and paper.year < 2013:
            report.warnings.append(f"{ctx}: SciVis before 2013 ({paper.year}) for '{paper.doi}'")
        if paper.venue == "Vis" and paper.year > 2012:
            report.warnings.append(f"{ctx}: Vis after 2012 ({paper.year}) for '{paper.doi}'")
        papers[paper.doi] = paper

    images: dict[str, ImageRecord] = {}
    seen_slots: set[tuple[str, int]] = set()
    for line_no, rec in _iter_records(images_path):
        ctx = f"{images_path}:{line_no}"
        img = _parse_image(rec, ctx)
        if img.doi not in papers:
            report.rejected_images.append(f"{ctx}: image '{img.image_id}' references "
                                          f"unknown doi '{img.doi}'")
            continue
        if img.image_id in images:
            report.rejected_images.append(f"{ctx}: duplicate image_id '{img.image_id}'")
            continue
        slot = (img.doi, img.in_paper_index)
        if slot in seen_slots:
            report.rejected_images.append(f"{ctx}: duplicate (doi, in_paper_index) "
                                          f"({img.doi}, {img.in_paper_index})")
            continue
        seen_slots.add(slot)
        images[img.image_id] = img

    report.n_papers = len(papers)
    report.n_images = len(images)
    return Catalog(papers, images, config), report


def save_catalog(catalog: Catalog, store_dir: PathLike) -> None:
    """Persist as two canonical JSONL files plus a small meta file."""
    store = Path(store_dir)
    store.mkdir(parents=True, exist_ok=True)
    with (store / "papers.jsonl").open("w", encoding="utf-8") as fh:
        for doi in sorted(catalog.papers):
            fh.write(json.dumps(catalog.papers[doi].to_record(), sort_keys=True) + "\n")
    with (store / "images.jsonl").open("w", encoding="utf-8") as fh:
        for iid in sorted(catalog.images):
            fh.write(json.dumps(catalog.images[iid].to_record(), sort_keys=True) + "\n")
    meta = {
        "year_min": catalog.config.year_min,
        "year_max": catalog.config.year_max,
        "stemming": catalog.config.stemming,
        "digest": catalog.digest(),
    }
    (store / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")


def load_catalog(store_dir: PathLike) -> Catalog:
    store = Path(store_dir)
    meta_path = store / "meta.json"
    if not meta_path.is_file():
        raise FileNotFoundError(f"no catalog store at {store} (missing meta.json)")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    config = CatalogConfig(year_min=int(meta["year_min"]), year_max=int(meta["year_max"]),
                           stemming=bool(meta["stemming"]))
    catalog, report = ingest(store / "papers.jsonl", store / "images.jsonl", config)
    if report.rejected_images:
        raise CatalogError(f"corrupt catalog store {store}: {report.rejected_images[0]}")
    return catalog
