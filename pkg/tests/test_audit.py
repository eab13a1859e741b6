"""Dataset consistency audits over constructed fixtures with planted counts."""

import json

import pytest

from vulnmatch.cpe import CpeUri, unbind_uri
from vulnmatch.feeds import CpeDictEntry, CveEntry, build_snapshot
from vulnmatch.audit import (
    audit_cves_without_cpes,
    audit_deprecations,
    audit_missing_dictionary_cpes,
    detect_semantic_duplicates,
    run_audit,
    write_report,
)


def _entry(raw, **kwargs):
    return CpeDictEntry(uri=CpeUri(raw), wfn=unbind_uri(raw), **kwargs)


def _cve(cve_id, *uris, summary=""):
    software = tuple((CpeUri(u), unbind_uri(u)) for u in uris)
    return CveEntry(id=cve_id, summary=summary, vuln_software=software)


@pytest.fixture()
def planted_snapshot():
    """10 CVEs with 3 CPE-less; 4 feed URIs with 2 missing; 2 duplicate pairs."""
    dictionary = [
        _entry("cpe:/a:digium:asterisk:1.4.0:beta1"),
        _entry("cpe:/a:acme:widget:2.0:rc1"),
        _entry("cpe:/a:mozilla:firefox:38.0"),
        _entry("cpe:/a:oracle:mysql:5.7.15"),
        _entry(
            "cpe:/a:adobe:flash_playe_for_linux:9.0.115.0",
            deprecated=True,
            deprecated_by=CpeUri("cpe:/a:adobe:flash_player_for_linux:9.0.115.0"),
            deprecation_reason="name-correction",
        ),
        _entry("cpe:/a:adobe:flash_player_for_linux:9.0.115.0"),
    ]
    cves = [
        _cve("CVE-2017-0001", "cpe:/a:digium:asterisk:1.4.0_beta1"),
        _cve("CVE-2017-0002", "cpe:/a:acme:widget:2.0_rc1"),
        _cve("CVE-2017-0003", "cpe:/a:mozilla:firefox:38.0"),
        _cve("CVE-2017-0004", "cpe:/a:oracle:mysql:5.7.15"),
        _cve("CVE-2017-0005", "cpe:/a:mozilla:firefox:38.0"),
        _cve("CVE-2017-0006", "cpe:/a:oracle:mysql:5.7.15"),
        _cve("CVE-2017-0007", "cpe:/a:digium:asterisk:1.4.0_beta1"),
        _cve("CVE-2017-0008", summary="a vulnerability without software list"),
        _cve("CVE-2017-0009", summary="another one"),
        _cve("CVE-2017-0010", summary="and a third"),
    ]
    return build_snapshot(dictionary, cves)


class TestCvesWithoutCpes:
    def test_planted_count(self, planted_snapshot):
        ids = audit_cves_without_cpes(planted_snapshot)
        assert len(ids) == 3
        assert set(ids) == {"CVE-2017-0008", "CVE-2017-0009", "CVE-2017-0010"}

    def test_empty_snapshot(self):
        assert audit_cves_without_cpes(build_snapshot([], [])) == ()


class TestMissingDictionaryCpes:
    def test_planted_count(self, planted_snapshot):
        missing = audit_missing_dictionary_cpes(planted_snapshot)
        assert set(missing) == {
            "cpe:/a:digium:asterisk:1.4.0_beta1",
            "cpe:/a:acme:widget:2.0_rc1",
        }

    def test_feeds_subset_of_dictionary(self):
        dictionary = [_entry("cpe:/a:mozilla:firefox:38.0")]
        cves = [_cve("CVE-2017-0001", "cpe:/a:mozilla:firefox:38.0")]
        assert audit_missing_dictionary_cpes(build_snapshot(dictionary, cves)) == ()


class TestDeprecations:
    def test_reason_tally(self, planted_snapshot):
        by_reason, dangling = audit_deprecations(planted_snapshot)
        assert by_reason == {"name-correction": 1}
        assert dangling == ()

    def test_no_deprecations(self):
        by_reason, dangling = audit_deprecations(build_snapshot([], []))
        assert by_reason == {} and dangling == ()

    def test_dangling_target_reported(self):
        dictionary = [
            _entry(
                "cpe:/a:acme:tool:1.0",
                deprecated=True,
                deprecated_by=CpeUri("cpe:/a:acme:tool2:1.0"),
                deprecation_reason="name-correction",
            ),
        ]
        by_reason, dangling = audit_deprecations(build_snapshot(dictionary, []))
        assert by_reason == {"name-correction": 1}
        assert len(dangling) == 1
        assert dangling[0].target == "cpe:/a:acme:tool2:1.0"


class TestSemanticDuplicates:
    def test_planted_pairs(self, planted_snapshot):
        pairs = detect_semantic_duplicates(planted_snapshot)
        assert len(pairs) == 2
        assert ("cpe:/a:digium:asterisk:1.4.0:beta1", "cpe:/a:digium:asterisk:1.4.0_beta1") in pairs
        assert ("cpe:/a:acme:widget:2.0:rc1", "cpe:/a:acme:widget:2.0_rc1") in pairs

    def test_identical_uris_never_flagged(self, planted_snapshot):
        for dict_uri, feed_uri in detect_semantic_duplicates(planted_snapshot):
            assert dict_uri != feed_uri

    def test_deduplicated(self, planted_snapshot):
        # the asterisk URI occurs in two CVEs but yields one pair
        pairs = detect_semantic_duplicates(planted_snapshot)
        assert len(set(pairs)) == len(pairs)

    def test_every_reported_uri_parses(self, planted_snapshot):
        report = run_audit(planted_snapshot)
        for dict_uri, feed_uri in report.semantic_duplicates:
            unbind_uri(dict_uri)
            unbind_uri(feed_uri)
        for uri in report.feed_cpes_missing:
            unbind_uri(uri)


class TestReport:
    def test_pure_function_of_snapshot(self, planted_snapshot):
        first = run_audit(planted_snapshot)
        second = run_audit(planted_snapshot)
        assert json.dumps(first.to_dict(), sort_keys=True) == json.dumps(
            second.to_dict(), sort_keys=True
        )

    def test_counts_equal_list_lengths(self, planted_snapshot):
        payload = run_audit(planted_snapshot).to_dict()
        assert payload["cves_without_cpes"]["count"] == len(payload["cves_without_cpes"]["ids"])
        assert payload["feed_cpes_missing"]["count"] == len(payload["feed_cpes_missing"]["uris"])
        assert payload["semantic_duplicates"]["count"] == len(
            payload["semantic_duplicates"]["pairs"]
        )

    def test_write_report(self, planted_snapshot, tmp_path):
        report = run_audit(planted_snapshot)
        out = write_report(report, tmp_path / "audit.json")
        payload = json.loads(out.read_text())
        assert payload["report_version"] == 1
        summary = (tmp_path / "audit.txt").read_text()
        assert "CVEs without CPE identifiers: 3" in summary

    def test_shared_fixture_flags_asterisk_pair(self, snapshot):
        pairs = detect_semantic_duplicates(snapshot)
        assert (
            "cpe:/a:digium:asterisk:1.4.0:beta1",
            "cpe:/a:digium:asterisk:1.4.0_beta1",
        ) in pairs
