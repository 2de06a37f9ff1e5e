import json

import pytest
from fastapi.testclient import TestClient

from figharvest.catalog import ingest, save_catalog
from figharvest.catalog.server import create_app


def paper(doi, year, venue, order, title, authors, abstract="", keywords=(),
          pages=10):
    return {"doi": doi, "title": title, "abstract": abstract,
            "authors": list(authors), "author_keywords": list(keywords),
            "venue": venue, "year": year, "page_count": pages,
            "proceedings_order": order}


def image(image_id, doi, index=1, type_="F", **extra):
    return {"image_id": image_id, "doi": doi, "in_paper_index": index,
            "type": type_, **extra}


def write_jsonl(path, records):
    with path.open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("catalog-api")
    papers = [
        paper("10.1/vis95", 1995, "Vis", 4, "Streamline Placement for Flow",
              ["John T. Stasko"], abstract="Even streamline spacing.",
              keywords=["flow visualization"]),
        paper("10.1/infovis04", 2004, "InfoVis", 2, "Evaluating Treemap Layouts",
              ["Grace Hopper"], abstract="Space filling layouts.",
              keywords=["treemap"]),
        paper("10.1/vast08", 2008, "VAST", 1, "Interactive Anomaly Analysis",
              ["Grace B. Hopper"], abstract="Analytics for anomalies and flow.",
              keywords=["anomaly detection"], pages=12),
    ]
    images = [
        image("i-95-1", "10.1/vis95", 1),
        image("i-95-2", "10.1/vis95", 2, type_="T"),
        image("i-04-1", "10.1/infovis04", 1, caption="Treemap overview."),
        image("i-08-1", "10.1/vast08", 1, type_="T"),
        image("i-08-2", "10.1/vast08", 2, color_plate_duplicate=True),
    ]
    papers_path = tmp / "papers.jsonl"
    images_path = tmp / "images.jsonl"
    write_jsonl(papers_path, papers)
    write_jsonl(images_path, images)
    cat, report = ingest(papers_path, images_path)
    assert report.rejected_images == []
    store = tmp / "store"
    save_catalog(cat, store)
    return TestClient(create_app(store))


class TestSearch:
    def test_no_facets_returns_everything(self, client):
        body = client.get("/api/search").json()
        assert body["count"] == 5
        assert len(body["results"]) == 5

    def test_results_are_in_canonical_order(self, client):
        body = client.get("/api/search").json()
        ids = [r["image_id"] for r in body["results"]]
        assert ids == ["i-95-1", "i-95-2", "i-04-1", "i-08-1", "i-08-2"]

    def test_result_payload_joins_paper_fields(self, client):
        body = client.get("/api/search", params={"terms": "treemap"}).json()
        assert body["count"] == 1
        rec = body["results"][0]
        assert rec["image_id"] == "i-04-1"
        assert rec["type"] == "F"
        assert rec["caption"] == "Treemap overview."
        assert rec["year"] == 2004
        assert rec["venue"] == "InfoVis"
        assert rec["proceedings_order"] == 2
        assert rec["paper_title"] == "Evaluating Treemap Layouts"
        assert rec["doi_url"] == "https://doi.org/10.1/infovis04"

    def test_terms_facet(self, client):
        body = client.get("/api/search", params={"terms": "flow"}).json()
        dois = {r["doi"] for r in body["results"]}
        assert dois == {"10.1/vis95", "10.1/vast08"}

    def test_keyword_term_mode(self, client):
        body = client.get("/api/search", params={
            "terms": "flow", "term_mode": "author_keywords"}).json()
        assert {r["doi"] for r in body["results"]} == {"10.1/vis95"}

    def test_author_facet(self, client):
        body = client.get("/api/search", params={"authors": "G. Hopper"}).json()
        assert {r["doi"] for r in body["results"]} == {"10.1/infovis04",
                                                       "10.1/vast08"}

    def test_venues_facet_is_comma_separated(self, client):
        body = client.get("/api/search", params={"venues": "Vis, VAST"}).json()
        assert {r["doi"] for r in body["results"]} == {"10.1/vis95",
                                                       "10.1/vast08"}

    def test_year_bounds_are_each_optional(self, client):
        low = client.get("/api/search", params={"year_min": 2004}).json()
        assert {r["year"] for r in low["results"]} == {2004, 2008}
        high = client.get("/api/search", params={"year_max": 2004}).json()
        assert {r["year"] for r in high["results"]} == {1995, 2004}
        both = client.get("/api/search", params={
            "year_min": 2000, "year_max": 2005}).json()
        assert {r["year"] for r in both["results"]} == {2004}

    def test_image_type_facet(self, client):
        tables = client.get("/api/search", params={"image_type": "table"}).json()
        assert {r["image_id"] for r in tables["results"]} == {"i-95-2", "i-08-1"}

    def test_combined_facets(self, client):
        body = client.get("/api/search", params={
            "terms": "flow", "image_type": "figure", "year_max": 2000}).json()
        assert [r["image_id"] for r in body["results"]] == ["i-95-1"]

    def test_empty_result_is_not_an_error(self, client):
        body = client.get("/api/search", params={"terms": "zebrafish"}).json()
        assert body == {"count": 0, "results": []}

    def test_bad_term_mode_is_400(self, client):
        resp = client.get("/api/search", params={"term_mode": "psychic"})
        assert resp.status_code == 400

    def test_bad_image_type_is_400(self, client):
        resp = client.get("/api/search", params={"image_type": "gif"})
        assert resp.status_code == 400

    def test_inverted_year_range_is_400(self, client):
        resp = client.get("/api/search", params={"year_min": 2010,
                                                 "year_max": 2000})
        assert resp.status_code == 400


class TestDetailRoutes:
    def test_image_detail_embeds_paper(self, client):
        body = client.get("/api/image/i-95-2").json()
        assert body["image_id"] == "i-95-2"
        assert body["type"] == "T"
        assert body["doi_url"] == "https://doi.org/10.1/vis95"
        assert body["paper"]["title"] == "Streamline Placement for Flow"
        assert body["paper"]["authors"] == ["John T. Stasko"]

    def test_unknown_image_is_404(self, client):
        resp = client.get("/api/image/i-nope")
        assert resp.status_code == 404
        assert "i-nope" in resp.json()["detail"]

    def test_paper_detail_takes_slashed_doi(self, client):
        body = client.get("/api/paper/10.1/vast08").json()
        assert body["doi"] == "10.1/vast08"
        assert body["doi_url"] == "https://doi.org/10.1/vast08"
        assert [img["image_id"] for img in body["images"]] == ["i-08-1",
                                                               "i-08-2"]

    def test_unknown_doi_is_404(self, client):
        resp = client.get("/api/paper/10.9/ghost")
        assert resp.status_code == 404


class TestStats:
    def test_totals_always_present(self, client):
        body = client.get("/api/stats", params={"group": ""}).json()
        assert body["totals"]["papers"] == 3
        assert body["totals"]["images"] == 4  # color plate duplicate excluded
        assert "by_year" not in body
        assert "by_venue" not in body

    def test_single_group(self, client):
        body = client.get("/api/stats", params={"group": "venue"}).json()
        assert body["by_venue"]["Vis"] == 2
        assert "by_year" not in body
        assert "cells" not in body

    def test_default_groups_include_cells(self, client):
        body = client.get("/api/stats").json()
        assert "by_year" in body and "by_venue" in body
        assert any(cell["venue"] == "VAST" and cell["year"] == 2008
                   for cell in body["cells"])


def test_cors_allows_browser_frontends(client):
    resp = client.get("/api/search", headers={"Origin": "http://localhost:5173"})
    assert resp.headers["access-control-allow-origin"] == "*"
