"""HTTP API over a catalog store; this is what the navigator talks to.

Query parameters mirror the Query facets. DOIs contain slashes, so the
paper route takes a path parameter.
"""

from pathlib import Path
from typing import Any, Optional, Union

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from figharvest.catalog.core import (
    Catalog,
    ImageRecord,
    Query,
    TermMode,
    load_catalog,
)

PathLike = Union[str, Path]


def _query_from_params(terms: Optional[str], term_mode: str, authors: Optional[str],
                       venues: Optional[str], year_min: Optional[int],
                       year_max: Optional[int], image_type: str) -> Query:
    year_range = None
    if year_min is not None or year_max is not None:
        year_range = (year_min if year_min is not None else -10**9,
                      year_max if year_max is not None else 10**9)
    venue_set = None
    if venues:
        venue_set = frozenset(v.strip() for v in venues.split(",") if v.strip())
    try:
        return Query(
            terms=terms or None,
            term_mode=TermMode(term_mode),
            authors=authors or None,
            venues=venue_set,
            year_range=year_range,
            image_type=image_type,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def _image_payload(catalog: Catalog, img: ImageRecord) -> dict[str, Any]:
    paper = catalog.papers[img.doi]
    return {
        **img.to_record(),
        "year": paper.year,
        "venue": paper.venue,
        "proceedings_order": paper.proceedings_order,
        "paper_title": paper.title,
        "doi_url": f"https://doi.org/{img.doi}",
    }


def create_app(store_dir: PathLike) -> FastAPI:
    catalog = load_catalog(store_dir)
    app = FastAPI(title="catalog API")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/search")
    def search(terms: Optional[str] = None,
               term_mode: str = "title_and_abstract",
               authors: Optional[str] = None,
               venues: Optional[str] = None,
               year_min: Optional[int] = None,
               year_max: Optional[int] = None,
               image_type: str = "both") -> dict[str, Any]:
        q = _query_from_params(terms, term_mode, authors, venues,
                               year_min, year_max, image_type)
        results = catalog.search(q)
        return {
            "count": len(results),
            "results": [_image_payload(catalog, img) for img in results],
        }

    @app.get("/api/image/{image_id}")
    def image_detail(image_id: str) -> dict[str, Any]:
        img = catalog.images.get(image_id)
        if img is None:
            raise HTTPException(status_code=404, detail=f"unknown image '{image_id}'")
        paper = catalog.papers[img.doi]
        payload = _image_payload(catalog, img)
        payload["paper"] = paper.to_record()
        return payload

    @app.get("/api/paper/{doi:path}")
    def paper_detail(doi: str) -> dict[str, Any]:
        paper = catalog.papers.get(doi)
        if paper is None:
            raise HTTPException(status_code=404, detail=f"unknown doi '{doi}'")
        return {
            **paper.to_record(),
            "doi_url": f"https://doi.org/{doi}",
            "images": [img.to_record() for img in catalog.images_for(doi)],
        }

    @app.get("/api/stats")
    def stats(group: str = "year,venue") -> dict[str, Any]:
        full = catalog.stats()
        groups = {g.strip() for g in group.split(",") if g.strip()}
        out: dict[str, Any] = {"totals": full["totals"]}
        if "venue" in groups:
            out["by_venue"] = full["by_venue"]
        if "year" in groups:
            out["by_year"] = full["by_year"]
        if {"year", "venue"} <= groups:
            out["cells"] = full["cells"]
        return out

    return app


def serve(store_dir: PathLike, port: int, host: str = "127.0.0.1") -> None:
    import uvicorn

    uvicorn.run(create_app(store_dir), host=host, port=port, log_level="warning")
