"""Fixtures: small dictionary and feed documents shaped like the real data.

The dictionary covers a plain entry carrying both bindings, a deprecated
typo entry with its correction, the MySQL candidate neighborhood, and one
half of a version/update encoding mismatch; the feed covers a normal entry,
entries with no software list, and clusters useful for grouping tests.
"""

import pytest

from vulnmatch.feeds import build_snapshot, parse_cpe_dictionary, parse_cve_feed

DICTIONARY_XML = b"""<?xml version="1.0" encoding="UTF-8"?>
<cpe-list xmlns="http://cpe.mitre.org/dictionary/2.0"
          xmlns:cpe-23="http://scap.nist.gov/schema/cpe-extension/2.3"
          xmlns:xml="http://www.w3.org/XML/1998/namespace">
  <generator>
    <product_name>National Vulnerability Database (NVD)</product_name>
    <schema_version>2.3</schema_version>
  </generator>
  <cpe-item name="cpe:/a:mozilla:firefox:38.0">
    <title xml:lang="en-US">Mozilla Firefox 38.0</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:mozilla:firefox:38.0:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:mozilla:firefox:48.0.2">
    <title xml:lang="en-US">Mozilla Firefox 48.0.2</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:mozilla:firefox:48.0.2:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:mozilla:seamonkey:2.35">
    <title xml:lang="en-US">Mozilla SeaMonkey 2.35</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:mozilla:seamonkey:2.35:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:adobe:flash_playe_for_linux:9.0.115.0" deprecated="true" deprecation_date="2009-01-12T16:22:19.090Z">
    <title xml:lang="en-US">Adobe Flash Playe For Linux 9.0.115.0</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:adobe:flash_playe_for_linux:9.0.115.0:*:*:*:*:*:*:*">
      <cpe-23:deprecation date="2009-01-12T16:22:19.090Z">
        <cpe-23:deprecated-by name="cpe:2.3:a:adobe:flash_player_for_linux:9.0.115.0:*:*:*:*:*:*:*" type="NAME_CORRECTION"/>
      </cpe-23:deprecation>
    </cpe-23:cpe23-item>
  </cpe-item>
  <cpe-item name="cpe:/a:adobe:flash_player_for_linux:9.0.115.0">
    <title xml:lang="en-US">Adobe Flash Player For Linux 9.0.115.0</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:adobe:flash_player_for_linux:9.0.115.0:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:oracle:mysql:5.7.15">
    <title xml:lang="en-US">Oracle MySQL 5.7.15</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:oracle:mysql:5.7.15:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:oracle:mysql:5.7.14">
    <title xml:lang="en-US">Oracle MySQL 5.7.14</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:oracle:mysql:5.7.14:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:oracle:mysql:5.6.33">
    <title xml:lang="en-US">Oracle MySQL 5.6.33</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:oracle:mysql:5.6.33:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:oracle:jserver:5.7.15">
    <title xml:lang="en-US">Oracle JServer 5.7.15</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:oracle:jserver:5.7.15:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:oracle:mysql_connector:5.7.15">
    <title xml:lang="en-US">Oracle MySQL Connector 5.7.15</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:oracle:mysql_connector:5.7.15:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:mysql:mysql:5.7.13">
    <title xml:lang="en-US">MySQL MySQL 5.7.13</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:mysql:mysql:5.7.13:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:wireshark:wireshark:2.0.0">
    <title xml:lang="en-US">Wireshark 2.0.0</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:wireshark:wireshark:2.0.0:*:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:digium:asterisk:1.4.0:beta1">
    <title xml:lang="en-US">Digium Asterisk 1.4.0 Beta1</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:digium:asterisk:1.4.0:beta1:*:*:*:*:*:*"/>
  </cpe-item>
  <cpe-item name="cpe:/a:ibm:rational_doors_next_generation:5.0">
    <title xml:lang="en-US">IBM Rational DOORS Next Generation 5.0</title>
    <cpe-23:cpe23-item name="cpe:2.3:a:ibm:rational_doors_next_generation:5.0:*:*:*:*:*:*:*"/>
  </cpe-item>
</cpe-list>
"""

FEED_XML = b"""<?xml version="1.0" encoding="UTF-8"?>
<nvd xmlns="http://scap.nist.gov/schema/feed/vulnerability/2.0"
     xmlns:vuln="http://scap.nist.gov/schema/vulnerability/0.4"
     xmlns:cvss="http://scap.nist.gov/schema/cvss-v2/0.2"
     nvd_xml_version="2.0" pub_date="2017-02-14T09:00:00">
  <entry id="CVE-2016-0006">
    <vuln:vulnerable-software-list>
      <vuln:product>cpe:/o:microsoft:windows_10</vuln:product>
      <vuln:product>cpe:/o:microsoft:windows_8.1</vuln:product>
    </vuln:vulnerable-software-list>
    <vuln:cve-id>CVE-2016-0006</vuln:cve-id>
    <vuln:published-datetime>2016-01-13T05:59:04.123-05:00</vuln:published-datetime>
    <vuln:cvss>
      <cvss:base_metrics>
        <cvss:score>7.2</cvss:score>
        <cvss:access-vector>LOCAL</cvss:access-vector>
      </cvss:base_metrics>
    </vuln:cvss>
    <vuln:summary>The kernel in Microsoft Windows 10 mishandles junctions, which allows local users to gain privileges.</vuln:summary>
  </entry>
  <entry id="CVE-2016-9748">
    <vuln:cve-id>CVE-2016-9748</vuln:cve-id>
    <vuln:published-datetime>2017-02-01T22:59:00.200-05:00</vuln:published-datetime>
    <vuln:summary>IBM DOORS Next Generation 5.0 and 6.0 is vulnerable to cross-site scripting.</vuln:summary>
  </entry>
  <entry id="CVE-2016-5350">
    <vuln:vulnerable-software-list>
      <vuln:product>cpe:/a:wireshark:wireshark:2.0.0</vuln:product>
    </vuln:vulnerable-software-list>
    <vuln:cve-id>CVE-2016-5350</vuln:cve-id>
    <vuln:published-datetime>2016-06-16T13:59:00.113-04:00</vuln:published-datetime>
    <vuln:cvss><cvss:base_metrics><cvss:score>6.8</cvss:score></cvss:base_metrics></vuln:cvss>
    <vuln:summary>The SPOOLSS dissector in Wireshark allows remote attackers to cause a denial of service.</vuln:summary>
  </entry>
  <entry id="CVE-2016-5351">
    <vuln:vulnerable-software-list>
      <vuln:product>cpe:/a:wireshark:wireshark:2.0.0</vuln:product>
      <vuln:product>cpe:/a:wireshark:wireshark:1.12.11</vuln:product>
    </vuln:vulnerable-software-list>
    <vuln:cve-id>CVE-2016-5351</vuln:cve-id>
    <vuln:published-datetime>2016-06-16T13:59:01.440-04:00</vuln:published-datetime>
    <vuln:summary>Wireshark mishandles the packet-bundle case, leading to a crash.</vuln:summary>
  </entry>
  <entry id="CVE-2016-9652">
    <vuln:vulnerable-software-list>
      <vuln:product>cpe:/a:mozilla:seamonkey:2.46</vuln:product>
    </vuln:vulnerable-software-list>
    <vuln:cve-id>CVE-2016-9652</vuln:cve-id>
    <vuln:summary>Memory safety bugs in Mozilla SeaMonkey allow remote code execution.</vuln:summary>
  </entry>
  <entry id="CVE-2016-9653">
    <vuln:vulnerable-software-list>
      <vuln:product>cpe:/a:mozilla:seamonkey:2.46</vuln:product>
    </vuln:vulnerable-software-list>
    <vuln:cve-id>CVE-2016-9653</vuln:cve-id>
    <vuln:summary>A buffer overflow in Mozilla SeaMonkey allows remote code execution.</vuln:summary>
  </entry>
  <entry id="CVE-2016-9654">
    <vuln:vulnerable-software-list>
      <vuln:product>cpe:/a:mozilla:seamonkey:2.46</vuln:product>
    </vuln:vulnerable-software-list>
    <vuln:cve-id>CVE-2016-9654</vuln:cve-id>
    <vuln:summary>A use-after-free in Mozilla SeaMonkey allows remote code execution.</vuln:summary>
  </entry>
  <entry id="CVE-2016-9655">
    <vuln:vulnerable-software-list>
      <vuln:product>cpe:/a:mozilla:seamonkey:2.35</vuln:product>
    </vuln:vulnerable-software-list>
    <vuln:cve-id>CVE-2016-9655</vuln:cve-id>
    <vuln:summary>An integer overflow in Mozilla SeaMonkey 2.35 allows remote code execution.</vuln:summary>
  </entry>
  <entry id="CVE-2017-0100">
    <vuln:vulnerable-software-list>
      <vuln:product>cpe:/a:digium:asterisk:1.4.0_beta1</vuln:product>
    </vuln:vulnerable-software-list>
    <vuln:cve-id>CVE-2017-0100</vuln:cve-id>
    <vuln:summary>Digium Asterisk beta builds mishandle SIP sessions.</vuln:summary>
  </entry>
  <entry id="CVE-2017-0200">
    <vuln:cve-id>CVE-2017-0200</vuln:cve-id>
    <vuln:summary>An unspecified component allows remote attackers to read files.</vuln:summary>
  </entry>
</nvd>
"""


@pytest.fixture(scope="session")
def dictionary_xml() -> bytes:
    return DICTIONARY_XML


@pytest.fixture(scope="session")
def feed_xml() -> bytes:
    return FEED_XML


@pytest.fixture(scope="session")
def snapshot(dictionary_xml, feed_xml):
    dictionary = parse_cpe_dictionary(dictionary_xml)
    feed = parse_cve_feed(feed_xml)
    assert dictionary.skipped == 0
    assert feed.skipped == 0
    return build_snapshot(dictionary.entries, feed.entries)
