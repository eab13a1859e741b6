"""Shared test utilities: independent oracles and random generators.

The oracles reimplement behavior naively and stay independent of the code
paths they check: full-matrix DP for edit distance, triple loops for the
CVE searches.
"""

import random

from vulnmatch.cpe import ANY, NA, AttributeValue, Wfn

SAFE_CHARS = "abcdefghijklmnopqrstuvwxyz0123456789"
PUNCT_CHARS = "._-"
SPECIAL_CHARS = "*?%/+~()!"


def levenshtein_oracle(a: str, b: str) -> int:
    """Quadratic full-matrix DP, kept deliberately naive."""
    rows, cols = len(a) + 1, len(b) + 1
    d = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        d[i][0] = i
    for j in range(cols):
        d[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[-1][-1]


def random_token(rng: random.Random, specials: bool = True) -> str:
    length = rng.randint(1, 12)
    chars = []
    for _ in range(length):
        roll = rng.random()
        if roll < 0.78 or not specials:
            chars.append(rng.choice(SAFE_CHARS))
        elif roll < 0.93:
            chars.append(rng.choice(PUNCT_CHARS))
        else:
            chars.append(rng.choice(SPECIAL_CHARS))
    text = "".join(chars)
    if text in ("*", "-"):
        text += "x"
    return text


def random_value(rng: random.Random) -> AttributeValue:
    roll = rng.random()
    if roll < 0.25:
        return ANY
    if roll < 0.35:
        return NA
    return AttributeValue.string(random_token(rng))


def random_wfn(rng: random.Random) -> Wfn:
    part = rng.choice(
        [ANY, NA, AttributeValue.string("a"), AttributeValue.string("o"), AttributeValue.string("h")]
    )
    return Wfn(
        part=part,
        vendor=random_value(rng),
        product=random_value(rng),
        version=random_value(rng),
        update=random_value(rng),
        edition=random_value(rng),
        language=random_value(rng),
        sw_edition=random_value(rng),
        target_sw=random_value(rng),
        target_hw=random_value(rng),
        other=random_value(rng),
    )


def naive_same_version(sw_text: str, cve_value: AttributeValue) -> bool:
    """Independent re-statement of the version comparison rules."""
    if cve_value.is_any:
        return True
    if cve_value.is_na:
        return False
    pattern = cve_value.text
    if pattern == sw_text:
        return True
    if "*" in pattern or "?" in pattern:
        if _naive_wildcard(pattern, sw_text):
            return True
    return _main_component(sw_text) == _main_component(pattern)


def _naive_wildcard(pattern: str, text: str) -> bool:
    # recursive wildcard matcher, deliberately unoptimized
    if not pattern:
        return not text
    head, rest = pattern[0], pattern[1:]
    if head == "*":
        return any(_naive_wildcard(rest, text[i:]) for i in range(len(text) + 1))
    if head == "?":
        return bool(text) and _naive_wildcard(rest, text[1:])
    return bool(text) and text[0] == head and _naive_wildcard(rest, text[1:])


def _main_component(text: str) -> object:
    head = text.split(".", 1)[0]
    if "." in text and head.isdigit():
        return int(head)
    if len(head) == 4 and head.isdigit() and 1900 <= int(head) <= 2099 and head == text:
        return int(head)
    if head.isdigit() and head == text and "." not in text:
        return text  # opaque: plain digits without dots stay text
    if "." not in text:
        return text
    return head


def alg1_oracle(assigned: Wfn, cves, threshold: int = 2) -> dict[str, set[str]]:
    """Naive triple loop over (cve, cpe) using the oracle distance."""
    vendor = assigned.vendor.text
    product = assigned.product.text
    sw_version = assigned.version.text if assigned.version.is_string else None
    out: dict[str, set[str]] = {}
    for cve in cves:
        for uri, wfn in cve.vuln_software:
            if not _naive_similar(wfn.product, product, threshold):
                continue
            if not _naive_similar(wfn.vendor, vendor, threshold):
                continue
            if sw_version is not None and not naive_same_version(sw_version, wfn.version):
                continue
            out.setdefault(cve.id, set()).add(uri.raw)
    return out


def alg2_oracle(assigned: Wfn, cves, threshold: int = 2) -> set[str]:
    """Naive scan of every (cve, word) pair for CPE-less CVEs."""
    vendor = assigned.vendor.text
    product = assigned.product.text
    out = set()
    for cve in cves:
        if cve.vuln_software:
            continue
        words = [w.strip(".,;:()[]'\"!?") for w in cve.summary.lower().split()]
        words = [w for w in words if w]
        product_hit = any(levenshtein_oracle(w, product) < 3 for w in words)
        vendor_hit = any(levenshtein_oracle(w, vendor) < 3 for w in words)
        if product_hit and vendor_hit:
            out.add(cve.id)
    return out


def _naive_similar(value: AttributeValue, text: str, threshold: int) -> bool:
    if value.is_any:
        return True
    if value.is_na:
        return False
    return levenshtein_oracle(value.text, text) <= threshold
