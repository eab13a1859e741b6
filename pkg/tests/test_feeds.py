"""Dictionary/feed parsing, snapshot building, persistence, and fetching."""

import threading
from datetime import datetime
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from vulnmatch.errors import DocumentError, DuplicateCveId, FeedNotFound, NetworkError
from vulnmatch.feeds import (
    CveEntry,
    build_snapshot,
    fetch_feed,
    load_snapshot,
    parse_cpe_dictionary,
    parse_cve_feed,
    save_snapshot,
)


class TestParseDictionary:
    def test_counts_and_first_entry(self, dictionary_xml):
        result = parse_cpe_dictionary(dictionary_xml)
        assert result.skipped == 0
        assert len(result.entries) == dictionary_xml.count(b"<cpe-item ")
        firefox = result.entries[0]
        assert firefox.uri.raw == "cpe:/a:mozilla:firefox:38.0"
        assert firefox.title == "Mozilla Firefox 38.0"
        assert firefox.deprecated is False
        assert firefox.formatted.raw == "cpe:2.3:a:mozilla:firefox:38.0:*:*:*:*:*:*:*"

    def test_empty_document(self):
        result = parse_cpe_dictionary(b'<?xml version="1.0"?><cpe-list/>')
        assert result.entries == [] and result.skipped == 0

    def test_deprecation_pair(self, dictionary_xml):
        entries = {e.uri.raw: e for e in parse_cpe_dictionary(dictionary_xml).entries}
        typo = entries["cpe:/a:adobe:flash_playe_for_linux:9.0.115.0"]
        assert typo.deprecated
        assert typo.deprecated_by.raw == "cpe:/a:adobe:flash_player_for_linux:9.0.115.0"
        assert typo.deprecation_reason == "name-correction"
        corrected = entries["cpe:/a:adobe:flash_player_for_linux:9.0.115.0"]
        assert not corrected.deprecated

    def test_bad_item_skipped_and_counted(self):
        xml = (
            b'<?xml version="1.0"?><cpe-list>'
            b'<cpe-item name="cpe:/x:bad:part"><title>Bad</title></cpe-item>'
            b'<cpe-item name="cpe:/a:ok:fine:1.0"><title>Fine</title></cpe-item>'
            b"</cpe-list>"
        )
        result = parse_cpe_dictionary(xml)
        assert result.skipped == 1
        assert [e.uri.raw for e in result.entries] == ["cpe:/a:ok:fine:1.0"]

    def test_not_xml_raises_document_error(self):
        with pytest.raises(DocumentError):
            parse_cpe_dictionary(b"this is not xml")

    def test_wfn_derived_from_uri(self, snapshot):
        from vulnmatch.cpe import unbind_uri

        for entry in snapshot.dictionary:
            assert entry.wfn == unbind_uri(entry.uri)


class TestParseFeed:
    def test_counts(self, feed_xml):
        result = parse_cve_feed(feed_xml)
        assert result.skipped == 0
        assert len(result.entries) == feed_xml.count(b"<entry ")

    def test_fig2_style_entry(self, feed_xml):
        entries = {e.id: e for e in parse_cve_feed(feed_xml).entries}
        cve = entries["CVE-2016-0006"]
        assert cve.summary.startswith("The kernel in Microsoft Windows 10")
        assert cve.cvss_score == 7.2
        assert cve.published == datetime.fromisoformat("2016-01-13T05:59:04.123-05:00")
        assert [uri.raw for uri, _ in cve.vuln_software] == [
            "cpe:/o:microsoft:windows_10",
            "cpe:/o:microsoft:windows_8.1",
        ]

    def test_entry_without_software_list_retained(self, feed_xml):
        entries = {e.id: e for e in parse_cve_feed(feed_xml).entries}
        assert entries["CVE-2016-9748"].vuln_software == ()

    def test_empty_feed(self):
        result = parse_cve_feed(b'<?xml version="1.0"?><nvd/>')
        assert result.entries == []

    def test_software_wfns_derive_from_uris(self, snapshot):
        from vulnmatch.cpe import unbind_uri

        for cve in snapshot.cves:
            for uri, wfn in cve.vuln_software:
                assert wfn == unbind_uri(uri)

    def test_bad_entry_id_skipped(self):
        xml = (
            b'<?xml version="1.0"?>'
            b'<nvd xmlns:vuln="urn:x"><entry id="NOT-A-CVE">'
            b"<vuln:summary>whatever</vuln:summary></entry></nvd>"
        )
        result = parse_cve_feed(xml)
        assert result.entries == [] and result.skipped == 1


class TestBuildSnapshot:
    def test_empty_inputs(self):
        snapshot = build_snapshot([], [])
        assert snapshot.dictionary == () and snapshot.cves == ()
        assert snapshot.deprecation_map == {}

    def test_duplicate_cve_id_rejected(self):
        cve = CveEntry(id="CVE-2020-0001")
        with pytest.raises(DuplicateCveId):
            build_snapshot([], [cve, cve])

    def test_indexes_point_at_owning_entries(self, snapshot):
        for entry in snapshot.dictionary:
            assert entry in snapshot.entries_with_vendor(entry.wfn.vendor.text)
            assert entry in snapshot.entries_with_product(entry.wfn.product.text)
        for token in snapshot.vendor_tokens_with_prefix(""):
            for entry in snapshot.entries_with_vendor(token):
                assert entry.wfn.vendor.text == token

    def test_prefix_lookup(self, snapshot):
        assert "mozilla" in snapshot.vendor_tokens_with_prefix("moz")
        assert snapshot.product_tokens_with_prefix("mysql") == ("mysql", "mysql_connector")

    def test_deprecation_map_and_resolution(self, snapshot):
        typo = "cpe:/a:adobe:flash_playe_for_linux:9.0.115.0"
        fixed = "cpe:/a:adobe:flash_player_for_linux:9.0.115.0"
        assert snapshot.deprecation_map == {typo: fixed}
        assert snapshot.resolve_deprecation(typo) == fixed
        # chains terminate at a non-deprecated entry
        terminal = snapshot.entry_for_uri(snapshot.resolve_deprecation(typo))
        assert terminal is not None and not terminal.deprecated

    def test_determinism(self, dictionary_xml, feed_xml):
        first = build_snapshot(
            parse_cpe_dictionary(dictionary_xml).entries, parse_cve_feed(feed_xml).entries
        )
        second = build_snapshot(
            parse_cpe_dictionary(dictionary_xml).entries, parse_cve_feed(feed_xml).entries
        )
        assert first == second


class TestSnapshotPersistence:
    def test_save_load_round_trip(self, snapshot, tmp_path):
        directory = save_snapshot(snapshot, tmp_path / "snap")
        loaded = load_snapshot(directory)
        assert loaded == snapshot
        assert loaded.snapshot_time == snapshot.snapshot_time

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DocumentError):
            load_snapshot(tmp_path)

    def test_unsupported_layout(self, snapshot, tmp_path):
        directory = save_snapshot(snapshot, tmp_path / "snap")
        (directory / "manifest.json").write_text('{"layout_version": 99}')
        with pytest.raises(DocumentError):
            load_snapshot(directory)


class _StubHandler(BaseHTTPRequestHandler):
    body = b"<cpe-list/>"
    etag = '"v1"'

    def do_GET(self):
        if self.headers.get("If-None-Match") == self.etag:
            self.send_response(304)
            self.end_headers()
            return
        if self.path == "/missing":
            self.send_response(404)
            self.end_headers()
            return
        self.send_response(200)
        self.send_header("ETag", self.etag)
        self.send_header("Content-Length", str(len(self.body)))
        self.end_headers()
        self.wfile.write(self.body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


class TestFetchFeed:
    def test_local_path(self, tmp_path):
        path = tmp_path / "feed.xml"
        path.write_bytes(b"<nvd/>")
        result = fetch_feed(str(path))
        assert not result.unchanged
        with result.open() as stream:
            assert stream.read() == b"<nvd/>"

    def test_local_missing(self, tmp_path):
        with pytest.raises(FeedNotFound):
            fetch_feed(str(tmp_path / "nope.xml"))

    def test_unreachable_url(self):
        with pytest.raises(NetworkError):
            fetch_feed("http://127.0.0.1:1/feed.xml", timeout=0.5)

    def test_conditional_refetch_reports_unchanged(self, stub_server, tmp_path):
        url = f"{stub_server}/dict.xml"
        first = fetch_feed(url, cache_dir=tmp_path)
        assert not first.unchanged
        assert first.content == _StubHandler.body
        second = fetch_feed(url, cache_dir=tmp_path)
        assert second.unchanged
        # the cached body from the first fetch is still reachable
        with second.open() as stream:
            assert stream.read() == _StubHandler.body

    def test_http_404(self, stub_server):
        with pytest.raises(FeedNotFound):
            fetch_feed(f"{stub_server}/missing")
