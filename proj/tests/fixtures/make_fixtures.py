#!/usr/bin/env python3
"""Regenerates the test fixtures under tests/fixtures.

Each replay session is a directory with session.json and one snapshot per
step. Next to the markup, the script writes expected/<source>_<slug>.json
holding the records a correct parser must extract; those lists are built
from the same source tables the markup is rendered from, never by parsing
the markup back.

Run from anywhere: python3 tests/fixtures/make_fixtures.py
"""

import hashlib
import html
import io
import json
import os
import random
import re
import shutil
import urllib.parse
import urllib.robotparser
import zipfile
from datetime import datetime

import openpyxl

HERE = os.path.dirname(os.path.abspath(__file__))
REPLAY = os.path.join(HERE, "replay")
EXPECTED = os.path.join(HERE, "expected")
RECORDED_AT = "2025-06-12T09:30:00Z"
ZIP_TIME = (2025, 4, 30, 12, 0, 0)

DMA_BASE = ("https://laegemiddelstyrelsen.dk/en/sideeffects/side-effects-of-medicines/"
            "interactive-adverse-drug-reaction-overviews/")


def slug(s):
    out, pending = [], False
    for c in s.lower():
        if c.isascii() and c.isalnum():
            if pending and out:
                out.append("-")
            out.append(c)
            pending = False
        else:
            pending = True
    return "".join(out) or "untitled"


def enc(term):
    return urllib.parse.quote(term, safe="-._~")


def esc(s):
    return html.escape(s, quote=True)


def page(title, body):
    return ("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
            f"<title>{esc(title)}</title>\n"
            "<script>window.dataLayer = window.dataLayer || [];</script>\n"
            "<style>.collapsed{display:none}</style>\n"
            f"</head>\n<body>\n{body}\n</body>\n</html>\n")


class Session:
    def __init__(self, source, term):
        self.source, self.term = source, term
        self.dir = os.path.join(REPLAY, source, slug(term))
        self.steps = []
        if os.path.isdir(self.dir):
            shutil.rmtree(self.dir)
        os.makedirs(self.dir)

    def add(self, action, content, selector=None, url=""):
        n = len(self.steps) + 1
        ext = ".bin" if action == "export" else ".html"
        name = f"{n:02d}_{action}{ext}"
        mode = "wb" if isinstance(content, bytes) else "w"
        with open(os.path.join(self.dir, name), mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"})) as f:
            f.write(content)
        self.steps.append({"step": n, "action": action, "selector": selector, "url": url})

    def close(self):
        doc = {"format": 1, "source": self.source, "term": self.term, "recorded_at": RECORDED_AT,
               "steps": self.steps}
        with open(os.path.join(self.dir, "session.json"), "w", encoding="utf-8", newline="\n") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")


def write_expected(source, term, raw_drug, records):
    os.makedirs(EXPECTED, exist_ok=True)
    doc = {"source": source, "term": term, "raw_drug": raw_drug, "recorded_at": RECORDED_AT,
           "records": [{"soc": s, "reaction": r, "count": c} for s, r, c in records]}
    with open(os.path.join(EXPECTED, f"{source}_{slug(term)}.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def fmt_thousands(n, sep):
    s = str(n)
    groups = []
    while len(s) > 3:
        groups.insert(0, s[-3:])
        s = s[:-3]
    groups.insert(0, s)
    return sep.join(groups)


# ---------------------------------------------------------------- DMA

NERV = "Nervous system disorders"
GEN = "General disorders and administration site conditions"
VASC = "Vascular disorders"
GI = "Gastrointestinal disorders"
REPRO = "Reproductive system and breast disorders"
PSY = "Psychiatric disorders"
CARD = "Cardiac disorders"
EYE = "Eye disorders"
MUSC = "Musculoskeletal and connective tissue disorders"
HEP = "Hepatobiliary disorders"
INJ = "Injury, poisoning and procedural complications"
SKIN = "Skin and subcutaneous tissue disorders"
INV = "Investigations"

# Published cells for the four reaction terms, plus a few further terms
# per drug so the overview looks like a real one.
ALPHA_BLOCKERS = {
    "Alfuzosin": [(NERV, "Dizziness", 32), (NERV, "Syncope", 11), (GEN, "Fatigue", 10), (NERV, "Headache", 9),
                  (VASC, "Hypotension", 8), (VASC, "Orthostatic hypotension", 6), (GI, "Nausea", 4),
                  (REPRO, "Ejaculation failure", 3)],
    "Doxazosin": [(NERV, "Dizziness", 9), (NERV, "Syncope", 5), (GEN, "Fatigue", 6), (NERV, "Headache", 10),
                  (VASC, "Hypotension", 5), (GEN, "Oedema peripheral", 4)],
    "Prazosin": [(NERV, "Dizziness", 3), (NERV, "Syncope", 7), (GEN, "Fatigue", 8), (NERV, "Headache", 10),
                 (PSY, "Nightmare", 2), (CARD, "Palpitations", 3)],
    "Tamsulosin": [(NERV, "Dizziness", 23), (NERV, "Syncope", 6), (GEN, "Fatigue", 5), (NERV, "Headache", 7),
                   (EYE, "Intraoperative floppy iris syndrome", 14), (REPRO, "Retrograde ejaculation", 9),
                   (GEN, "Drug ineffective", 12)],
    "Terazosin": [(NERV, "Dizziness", 2), (NERV, "Syncope", 1), (GEN, "Fatigue", 2), (NERV, "Headache", 1),
                  (VASC, "Hypotension", 1), (GEN, "Asthenia", 2)],
}

ATORVASTATIN_DMA = [
    (MUSC, "Myalgia", 1342), (MUSC, "Muscle spasms", 187), (MUSC, "Rhabdomyolysis", 96), (MUSC, "Arthralgia", 143),
    (INV, "Hepatic enzyme increased", 58), (HEP, "Hepatitis", 17), (GEN, "Fatigue", 61), (GI, "Nausea", 44),
    (NERV, "Memory impairment", 39), (SKIN, "Rash", 22), (INJ, "Fall", 5)]


def by_soc(rows):
    grouped = {}
    for soc, pt, n in rows:
        grouped.setdefault(soc, []).append((pt, n))
    return grouped


def dma_session(drug, rows, listed=None, drug_id=None):
    s = Session("dma", drug)
    drug_id = drug_id or slug(drug)
    listed = listed or [drug]
    items = "\n".join(
        f'  <li><a class="drug-link" href="?drug={slug(name)}" data-drug-id="{slug(name)}">{esc(name)}</a></li>'
        for name in listed)
    s.add("load", page("Search results", (
        '<header><nav class="breadcrumb">Home &rsaquo; Side effects</nav></header>\n'
        f'<form id="search"><input name="search" value="{esc(drug)}"></form>\n'
        f'<ul id="search-results">\n{items}\n</ul>')), url=DMA_BASE + "?search=" + enc(drug))
    overview_url = DMA_BASE + "?drug=" + drug_id
    grouped = by_soc(rows)
    collapsed = "\n".join(
        f'    <tr class="soc collapsed-group" data-soc="{esc(soc)}"><th colspan="2">{esc(soc)}</th></tr>'
        for soc in sorted(grouped))
    header = (f'<h1 class="drug-name">{esc(drug)}</h1>\n'
              '<p class="period">Reports received 1968&ndash;2025</p>\n'
              '<button id="expand-all" type="button">Expand all</button>\n')
    s.add("click", page(drug, header + (
        '<table id="adr-table">\n  <thead><tr><th>Reaction</th><th>Reports</th></tr></thead>\n'
        f'  <tbody>\n{collapsed}\n  </tbody>\n</table>')),
        selector=f'a.drug-link[data-drug-id="{drug_id}"]', url=overview_url)
    body_rows = []
    expected = []
    for soc in sorted(grouped):
        body_rows.append(f'    <tr class="soc" data-soc="{esc(soc)}"><th colspan="2">{esc(soc)}</th></tr>')
        for pt, n in grouped[soc]:
            body_rows.append(f'    <tr class="pt"><td class="pt-name">{esc(pt)}</td>'
                             f'<td class="pt-count">{fmt_thousands(n, ".")}</td></tr>')
            expected.append((soc, pt, n))
    s.add("click", page(drug, header + (
        '<table id="adr-table">\n  <thead><tr><th>Reaction</th><th>Reports</th></tr></thead>\n'
        '  <tbody>\n' + "\n".join(body_rows) + '\n  </tbody>\n</table>')),
        selector="#expand-all", url=overview_url)
    s.close()
    write_expected("dma", drug, drug, expected)


def make_dma():
    for drug, rows in ALPHA_BLOCKERS.items():
        dma_session(drug, rows, listed=[drug, drug + " \"Orifarm\""] if drug == "Tamsulosin" else None)
    dma_session("Atorvastatin", ATORVASTATIN_DMA, listed=["Atorvastatin", "Atorvastatin/Ezetimibe"])
    dma_session("Ranolazine", [])


# ---------------------------------------------------------------- VigiAccess

ATORVASTATIN_VIGI = [
    (MUSC, "Myalgia", 24512), (MUSC, "Muscle spasms", 5120), (MUSC, "Rhabdomyolysis", 3301),
    (MUSC, "Arthralgia", 4020), (MUSC, "Pain in extremity", 3876),
    (GEN, "Fatigue", 4133), (GEN, "Drug ineffective", 2950), (GEN, "Asthenia", 2210),
    (NERV, "Dizziness", 2744), (NERV, "Headache", 2398), (NERV, "Memory impairment", 1410),
    (GI, "Nausea", 2601), (GI, "Diarrhoea", 2115),
    (INV, "Blood creatine phosphokinase increased", 2987), (INV, "Hepatic enzyme increased", 1802),
    (INJ, "Off label use", 640), (INJ, "Fall", 598),
]


def make_vigiaccess():
    search_base = "https://www.vigiaccess.org/search?q="
    drug = "Atorvastatin"
    s = Session("vigiaccess", drug)
    s.add("load", page("VigiAccess", (
        '<div id="disclaimer" class="accepted"></div>\n'
        '<div id="search-results">\n'
        '  <a class="result" data-index="0" href="#">Atorvastatin</a>\n'
        '  <a class="result" data-index="1" href="#">Atorvastatin calcium; Ezetimibe</a>\n'
        '  <a class="result" data-index="2" href="#">Amlodipine; Atorvastatin</a>\n'
        '</div>')), url=search_base + enc(drug))
    grouped = by_soc(ATORVASTATIN_VIGI)
    socs = sorted(grouped)
    total = sum(n for _, _, n in ATORVASTATIN_VIGI)

    def overview(expanded):
        groups = []
        for k, soc in enumerate(socs):
            soc_total = sum(n for _, n in grouped[soc])
            inner = ""
            if k in expanded:
                items = "\n".join(
                    f'      <li><span class="pt-name">{esc(pt)}</span> '
                    f'<span class="pt-count">({fmt_thousands(n, ",")})</span></li>'
                    for pt, n in grouped[soc])
                inner = f'\n    <ul class="pt-list">\n{items}\n    </ul>'
            groups.append(
                f'  <div class="soc-group" data-soc-index="{k}">\n'
                f'    <span class="soc-name">{esc(soc)}</span> <span class="soc-count">({fmt_thousands(soc_total, ",")})</span>\n'
                f'    <button class="soc-toggle" type="button">+</button>{inner}\n  </div>')
        return page("VigiAccess - Atorvastatin", (
            f'<h2 class="active-ingredient">Atorvastatin</h2>\n'
            f'<p class="total">Total number of reports: {fmt_thousands(total, ",")}</p>\n'
            '<div id="reactions">\n' + "\n".join(groups) + "\n</div>"))

    s.add("click", overview(set()), selector='#search-results a.result[data-index="0"]',
          url="https://www.vigiaccess.org/search?q=Atorvastatin#result-0")
    expected = []
    for k, soc in enumerate(socs):
        s.add("click", overview(set(range(k + 1))),
              selector=f'div.soc-group[data-soc-index="{k}"] button.soc-toggle',
              url="https://www.vigiaccess.org/search?q=Atorvastatin#result-0")
        expected.extend((soc, pt, n) for pt, n in grouped[soc])
    s.close()
    write_expected("vigiaccess", drug, drug, expected)

    g = Session("vigiaccess", "Qwxzptl")
    g.add("load", page("VigiAccess", '<div id="search-results">\n  <p class="empty">No results</p>\n</div>'),
          url=search_base + "Qwxzptl")
    g.close()


# ---------------------------------------------------------------- Lareb

ATORVASTATIN_LAREB = [
    (MUSC, "Myalgia", 1184), (MUSC, "Muscle spasms", 323), (MUSC, "Arthralgia", 276), (MUSC, "Muscle weakness", 190),
    (GEN, "Fatigue", 402), (GEN, "Malaise", 88),
    (NERV, "Dizziness", 151), (NERV, "Paraesthesia", 97),
    (GI, "Nausea", 120), (GI, "Abdominal pain upper", 64),
    (SKIN, "Pruritus", 71), (SKIN, "Alopecia", 52),
]


def lareb_session(drug, rows, product_id, pane=True):
    url = "https://www.lareb.nl/en/search-drug?q=" + enc(drug)
    s = Session("lareb", drug)
    s.add("load", page("Lareb - search", (
        '<div class="search-box"><input value="%s"></div>\n<div class="spinner">Loading results&hellip;</div>'
        % esc(drug))), url=url)
    if pane:
        s.add("wait", page("Lareb - search", (
            '<div id="results-pane">\n'
            f'  <a class="product" data-product-id="{product_id}" href="#">{esc(drug)}</a>\n'
            f'  <a class="product" data-product-id="{product_id}-comb" href="#">{esc(drug)} / Ezetimibe</a>\n'
            '</div>')), selector="#results-pane", url=url)
    else:
        s.add("wait", page("Lareb - search", '<div class="spinner">Loading results&hellip;</div>'),
              selector="#results-pane", url=url)
        s.close()
        return
    grouped = by_soc(rows)
    socs = sorted(grouped)
    detail_url = f"https://www.lareb.nl/en/databank/product/{product_id}"

    def overview(expanded):
        if not rows:
            return page(drug, (
                f'<div id="report-overview">\n  <h2>{esc(drug)}</h2>\n'
                '  <p class="no-reports">No reports have been received for this product.</p>\n</div>'))
        sections = []
        for k, soc in enumerate(socs):
            inner = ""
            if k in expanded:
                trs = "\n".join(
                    f'        <tr><td class="reaction">{esc(pt)}</td><td class="reports">{n}</td></tr>'
                    for pt, n in grouped[soc])
                inner = ('\n    <table class="group-reactions">\n'
                         '      <thead><tr><th>Reaction</th><th>Reports</th></tr></thead>\n'
                         f'      <tbody>\n{trs}\n      </tbody>\n    </table>')
            sections.append(
                f'  <section class="reaction-group" data-group="{k}">\n'
                f'    <h3 class="group-name">{esc(soc)}</h3>\n'
                f'    <button class="group-toggle" type="button" aria-expanded="{"true" if k in expanded else "false"}">'
                f'Show</button>{inner}\n  </section>')
        return page(drug, f'<div id="report-overview">\n  <h2>{esc(drug)}</h2>\n' + "\n".join(sections) + "\n</div>")

    s.add("click", overview(set()), selector=f'a.product[data-product-id="{product_id}"]', url=detail_url)
    expected = []
    for k, soc in enumerate(socs):
        s.add("click", overview(set(range(k + 1))),
              selector=f'section.reaction-group[data-group="{k}"] button.group-toggle', url=detail_url)
        expected.extend((soc, pt, n) for pt, n in grouped[soc])
    s.close()
    write_expected("lareb", drug, drug, expected)


def make_lareb():
    lareb_session("Atorvastatin", ATORVASTATIN_LAREB, "atorvastatin-1043")
    lareb_session("Cerivastatin", [], "cerivastatin-2207")
    lareb_session("Pitavastatin", [], "pitavastatin-3311", pane=False)


# ---------------------------------------------------------------- Medsafe

ATORVASTATIN_MEDSAFE = [
    ("Myalgia", 212), ("Arthralgia", 41), ("Muscle spasms", 36), ("Rhabdomyolysis", 19), ("Fatigue", 28),
    ("Hepatic function abnormal", 14), ("Nausea", 12), ("Rash", 9), ("Memory impairment", 8),
    ("Pancreatitis", 3), ("Tendon rupture", 2),
]


def medsafe_session(drug, rows, ingredient_id):
    url = "https://www.medsafe.govt.nz/SMARS/Default?ingredient=" + enc(drug)
    s = Session("medsafe", drug)
    s.add("load", page("Suspected Medicine Adverse Reaction Search", (
        '<table id="ingredient-results">\n  <tr><th>Ingredient</th></tr>\n'
        f'  <tr><td><a class="ingredient" data-ingredient-id="{ingredient_id}" '
        f'href="Results?ingredient={ingredient_id}">{esc(drug)}</a></td></tr>\n'
        f'  <tr><td><a class="ingredient" data-ingredient-id="{ingredient_id}9" '
        f'href="Results?ingredient={ingredient_id}9">{esc(drug)} + ezetimibe</a></td></tr>\n'
        '</table>')), url=url)
    trs = "\n".join(f"    <tr><td>{esc(pt)}</td><td>{n}</td></tr>" for pt, n in rows)
    s.add("click", page("Results", (
        f'<h2>Reports for {esc(drug)}</h2>\n'
        '<table id="reaction-summary">\n  <thead><tr><th>Reaction</th><th>Number of reports</th></tr></thead>\n'
        f'  <tbody>\n{trs}\n  </tbody>\n</table>')),
        selector=f'a.ingredient[data-ingredient-id="{ingredient_id}"]',
        url=f"https://www.medsafe.govt.nz/SMARS/Results?ingredient={ingredient_id}")
    s.close()
    write_expected("medsafe", drug, drug, [(None, pt, n) for pt, n in rows])


def make_medsafe():
    medsafe_session("Atorvastatin", ATORVASTATIN_MEDSAFE, "1201")
    medsafe_session("Fluvastatin", [("Myalgia", 4)], "1307")
    medsafe_session("Lovastatin", [], "1410")


# ---------------------------------------------------------------- DAEN

ATORVASTATIN_DAEN = [
    (MUSC, "Myalgia", 1893), (MUSC, "Rhabdomyolysis", 244), (MUSC, "Arthralgia", 301), (MUSC, "Muscle spasms", 175),
    (GEN, "Fatigue", 210), (GEN, "Drug ineffective", 48),
    (INV, "Hepatic enzyme increased", 133), (INV, "Blood creatine phosphokinase increased", 150),
    (NERV, "Dizziness", 88), (NERV, "Memory impairment", 67),
    (GI, "Nausea", 96), (INJ, "Fall", 12),
]


def daen_workbook(rows):
    wb = openpyxl.Workbook()
    wb.properties.created = datetime(2025, 6, 12, 9, 30, 0)
    wb.properties.modified = datetime(2025, 6, 12, 9, 30, 0)
    wb.properties.creator = "DAEN"
    ws = wb.active
    ws.title = "Medicine summary"
    ws.append(["Database of Adverse Event Notifications - medicines"])
    info = wb.create_sheet("Reactions")
    info.append(["System organ class", "MedDRA reaction term", "Number of cases", "Number of cases with a single suspected medicine", "Number of cases where death was a reported outcome"])
    for soc, pt, n in rows:
        info.append([soc, pt, n, n // 3, 0])
    buf = io.BytesIO()
    wb.save(buf)
    # Rewrite with fixed member times so the bytes do not depend on when
    # the script ran.
    src = zipfile.ZipFile(io.BytesIO(buf.getvalue()))
    out = io.BytesIO()
    with zipfile.ZipFile(out, "w", zipfile.ZIP_DEFLATED) as dst:
        for item in src.infolist():
            data = src.read(item.filename)
            if item.filename == "docProps/core.xml":
                data = re.sub(rb"\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ", b"2025-06-12T09:30:00Z", data)
            zi = zipfile.ZipInfo(item.filename, ZIP_TIME)
            zi.compress_type = zipfile.ZIP_DEFLATED
            dst.writestr(zi, data)
    return out.getvalue()


def daen_session(drug, rows, medicine_id):
    url = "https://daen.tga.gov.au/medicines-search/?q=" + enc(drug)
    s = Session("daen", drug)
    s.add("load", page("DAEN - medicines", (
        '<ul id="medicine-results">\n'
        f'  <li><a class="medicine" data-medicine-id="{medicine_id}" href="#">{esc(drug.upper())}</a></li>\n'
        '</ul>')), url=url)
    s.add("click", page("DAEN - medicines", (
        f'<h2>{esc(drug.upper())}</h2>\n<p>Cases: {sum(n for _, _, n in rows)}</p>\n'
        '<button id="prepare-export" type="button">Export to Excel</button>')),
        selector=f'a.medicine[data-medicine-id="{medicine_id}"]', url=url + f"&medicine={medicine_id}")
    s.add("click", page("DAEN - medicines", '<div class="export-status">Preparing export&hellip;</div>'),
          selector="#prepare-export", url=url + f"&medicine={medicine_id}")
    s.add("wait", page("DAEN - medicines", (
        '<div class="export-status">Your export is ready.</div>\n'
        f'<a id="download-export" href="/export/{medicine_id}.xlsx">Download</a>')),
        selector="a#download-export", url=url + f"&medicine={medicine_id}")
    s.add("export", daen_workbook(rows), selector="a#download-export")
    s.close()
    write_expected("daen", drug, drug.upper(), rows)


def make_daen():
    daen_session("Atorvastatin", ATORVASTATIN_DAEN, "5582")
    daen_session("Fluvastatin", [], "6104")


# ---------------------------------------------------------------- FAERS

STATINS = ["ATORVASTATIN", "FLUVASTATIN", "LOVASTATIN", "PRAVASTATIN", "ROSUVASTATIN", "SIMVASTATIN"]
OTHERS = ["METFORMIN", "ASPIRIN", "LISINOPRIL", "AMLODIPINE", "OMEPRAZOLE", "EZETIMIBE"]
PTS = ["Myalgia", "Rhabdomyolysis", "Hepatic enzyme increased", "Fatigue", "Nausea", "Diarrhoea",
       "Drug ineffective", "Arthralgia", "Muscle spasms", "Headache"]

DRUG_HEADER = ("primaryid$caseid$drug_seq$role_cod$drugname$prod_ai$val_vbm$route$dose_vbm$cum_dose_chr$"
               "cum_dose_unit$dechal$rechal$lot_num$exp_dt$nda_num$dose_amt$dose_unit$dose_form$dose_freq")
REAC_HEADER = "primaryid$caseid$pt$drug_rec_act"
DEMO_HEADER = ("primaryid$caseid$caseversion$i_f_code$event_dt$mfr_dt$init_fda_dt$fda_dt$rept_cod$auth_num$"
               "mfr_num$mfr_sndr$lit_ref$age$age_cod$age_grp$sex$e_sub$wt$wt_cod$rept_dt$to_mfr$occp_cod$"
               "reporter_country$occr_country")


def faers_quarter():
    rng = random.Random(20250401)
    drug_lines, reac_lines, demo_lines = [DRUG_HEADER], [REAC_HEADER], [DEMO_HEADER]
    reports = []
    for r in range(72):
        pid = str(250000000 + r * 7 + 3)
        cid = str(25000000 + r)
        drugs = rng.sample(STATINS, rng.choice([1, 1, 1, 2])) + rng.sample(OTHERS, rng.choice([0, 1, 1, 2]))
        pts = rng.sample(PTS, rng.choice([1, 1, 2, 3]))
        reports.append((pid, cid, drugs, pts))
    for pid, cid, drugs, pts in reports:
        demo_lines.append(f"{pid}${cid}$1$I$20250105$$20250110$20250110$EXP$$$$$63$YR$$M$Y$$$20250110$$MD$US$US")
        for seq, d in enumerate(drugs, 1):
            role = "PS" if seq == 1 else rng.choice(["SS", "C", "C"])
            name = d
            if d == "ATORVASTATIN" and rng.random() < 0.3:
                name = "Atorvastatin"
            drug_lines.append(f"{pid}${cid}${seq}${role}${name}${d.lower()}$1$ORAL$20 MG$$$D$$$$$20$MG$TABLET$QD")
        for pt in pts:
            reac_lines.append(f"{pid}${cid}${pt}$")

    # Engineered duplicates: the same drug listed twice on one report,
    # the same reaction listed twice, and reports with no reactions.
    pid, cid, drugs, pts = reports[3]
    drug_lines.append(f"{pid}${cid}$9$C${drugs[0]}${drugs[0].lower()}$1$ORAL$40 MG$$$U$$$$$40$MG$TABLET$QD")
    pid, cid, drugs, pts = reports[10]
    drug_lines.append(f"{pid}${cid}$8$SS${drugs[0].lower()}${drugs[0].lower()}$1$ORAL$$$$$$$$$$$$")
    for k in (5, 17, 29):
        pid, cid, drugs, pts = reports[k]
        reac_lines.append(f"{pid}${cid}${pts[0]}$")
    drug_lines.append("259999991$25999999$1$PS$SIMVASTATIN$simvastatin$1$ORAL$$$$$$$$$$$$")
    reac_lines.append("259999997$25999998$Myalgia$")
    # Malformed lines: too few fields, too many fields.
    drug_lines.append("250000003$25000000$3$PS$ATORVASTATIN")
    drug_lines.append("250000010$25000001$4$SS$ROSUVASTATIN$rosuvastatin$1$ORAL$$$$$$$$$$$$$$extra")
    reac_lines.append("250000017$Myalgia")
    # A line ending in the delimiter, as some extracts do.
    pid, cid, drugs, pts = reports[40]
    drug_lines.append(f"{pid}${cid}$7$C$OMEPRAZOLE$omeprazole$1$ORAL$$$$$$$$$$$$$")

    drug_txt = "\r\n".join(drug_lines) + "\r\n"
    reac_txt = "\r\n".join(reac_lines) + "\r\n"
    demo_txt = "\r\n".join(demo_lines) + "\r\n"
    return drug_txt, reac_txt, demo_txt


def oracle_join(drug_txt, reac_txt):
    def rows(txt):
        lines = [l for l in txt.split("\r\n") if l.strip()]
        header = lines[0].split("$")
        out = []
        for l in lines[1:]:
            f = l.split("$")
            if len(f) == len(header) + 1 and f[-1] == "":
                f = f[:-1]
            if len(f) != len(header):
                continue
            out.append(dict(zip(header, f)))
        return out

    drugs, reacs = rows(drug_txt), rows(reac_txt)
    cells = {}
    spelled, pt_spelled = {}, {}
    for d in drugs:
        name = d["drugname"].strip()
        key = name.lower()
        spelled[key] = min(spelled.get(key, name), name)
        for r in reacs:
            if r["primaryid"].strip() == d["primaryid"].strip():
                pt = r["pt"].strip()
                pt_spelled[pt.lower()] = min(pt_spelled.get(pt.lower(), pt), pt)
                cells.setdefault((key, pt.lower()), set()).add(d["primaryid"].strip())
    return [{"drug": spelled[k].title(), "raw_drug": spelled[k], "reaction": pt_spelled[p], "count": len(ids)}
            for (k, p), ids in sorted(cells.items())]


def write_zip(path, members):
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as z:
        for name, data in members:
            zi = zipfile.ZipInfo(name, ZIP_TIME)
            zi.compress_type = zipfile.ZIP_DEFLATED
            z.writestr(zi, data)


def faers_index(quarters, extra=""):
    links = []
    for y, q in quarters:
        links.append(
            f'<tr><td>{["January - March", "April - June", "July - September", "October - December"][q - 1]} {y}</td>'
            f'<td><a href="https://fis.fda.gov/content/Exports/faers_ascii_{y}q{q}.zip">ASCII</a></td>'
            f'<td><a href="https://fis.fda.gov/content/Exports/faers_xml_{y}q{q}.zip">XML</a></td></tr>')
    return page("FAERS Quarterly Data Extract Files", (
        '<h1>FDA Adverse Event Reporting System (FAERS) Quarterly Data Extract Files</h1>\n' + extra +
        '<table class="quarters">\n' + "\n".join(links) + "\n</table>"))


def make_faers():
    d = os.path.join(HERE, "faers")
    os.makedirs(d, exist_ok=True)
    rd = os.path.join(REPLAY, "faers")
    os.makedirs(rd, exist_ok=True)
    drug_txt, reac_txt, demo_txt = faers_quarter()
    for name, txt in (("DRUG25Q1.txt", drug_txt), ("REAC25Q1.txt", reac_txt), ("DEMO25Q1.txt", demo_txt)):
        with open(os.path.join(d, name), "w", encoding="ascii", newline="") as f:
            f.write(txt)
    with open(os.path.join(d, "expected_join.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(oracle_join(drug_txt, reac_txt), f, indent=2)
        f.write("\n")
    write_zip(os.path.join(rd, "faers_ascii_2025q1.zip"), [
        ("ASCII/DEMO25Q1.txt", demo_txt), ("ASCII/DRUG25Q1.txt", drug_txt), ("ASCII/REAC25Q1.txt", reac_txt),
        ("ASCII/README.doc", "FAERS ASCII data extract, synthetic test quarter\r\n")])
    quarters = [(2025, 1), (2024, 4), (2024, 3), (2024, 2), (2024, 1), (2012, 4)]
    note = ('<p>Older extracts (legacy AERS, 2004&ndash;2012Q3) are at '
            '<a href="https://fis.fda.gov/content/Exports/aers_ascii_2012q3.zip">AERS</a>.</p>\n')
    with open(os.path.join(rd, "FPD-QDE-FAERS.html"), "w", encoding="utf-8", newline="\n") as f:
        f.write(faers_index(quarters, note))
    with open(os.path.join(d, "index_single.html"), "w", encoding="utf-8", newline="\n") as f:
        f.write(faers_index([(2025, 1)]))
    with open(os.path.join(d, "index_no_links.html"), "w", encoding="utf-8", newline="\n") as f:
        f.write(page("FAERS Quarterly Data Extract Files", "<p>The page is being updated.</p>"))


# ---------------------------------------------------------------- VAERS

def make_vaers():
    d = os.path.join(HERE, "vaers")
    os.makedirs(d, exist_ok=True)
    rd = os.path.join(REPLAY, "vaers")
    os.makedirs(rd, exist_ok=True)
    rows = "\n".join(
        f'<tr><td>{y}</td><td><a href="/eSubDownload/index.jsp?fn={y}VAERSData.zip">{y}VAERSData.zip</a></td></tr>'
        for y in range(2025, 2018, -1))
    with open(os.path.join(rd, "datasets.html"), "w", encoding="utf-8", newline="\n") as f:
        f.write(page("VAERS Data Sets", (
            '<p>Downloads require completing a verification step.</p>\n'
            '<table id="annual">\n' + rows + '\n</table>\n'
            '<p><a href="/eSubDownload/index.jsp?fn=AllVAERSDataCSVS.zip">All years</a></p>')))
    with open(os.path.join(d, "datasets_single.html"), "w", encoding="utf-8", newline="\n") as f:
        f.write(page("VAERS Data Sets", '<a href="/eSubDownload/index.jsp?fn=2024VAERSData.zip">2024</a>'))
    with open(os.path.join(d, "datasets_no_links.html"), "w", encoding="utf-8", newline="\n") as f:
        f.write(page("VAERS Data Sets", "<p>Maintenance.</p>"))
    write_zip(os.path.join(d, "2024VAERSData.zip"), [
        ("2024VAERSDATA.csv", "VAERS_ID,RECVDATE,STATE,AGE_YRS\r\n2700001,01/02/2024,TX,34\r\n"),
        ("2024VAERSSYMPTOMS.csv", "VAERS_ID,SYMPTOM1,SYMPTOMVERSION1\r\n2700001,Headache,26.1\r\n"),
        ("2024VAERSVAX.csv", "VAERS_ID,VAX_TYPE,VAX_MANU\r\n2700001,FLU4,SANOFI PASTEUR\r\n")])
    with open(os.path.join(d, "not_a_zip.txt"), "w", encoding="utf-8", newline="\n") as f:
        f.write("VAERS_ID,RECVDATE\n2700001,01/02/2024\n")


# ---------------------------------------------------------------- robots

ROBOTS_CASES = {
    "basic.txt": ("User-agent: *\nDisallow: /private/\nDisallow: /tmp\n",
                  ["/", "/private/", "/private/x.html", "/privatex", "/tmp", "/tmp/a", "/public/page"]),
    "agent_group.txt": ("User-agent: pharmaharvest\nDisallow: /search\n\nUser-agent: *\nDisallow: /\n",
                        ["/", "/search", "/search?q=1", "/about"]),
    "empty_disallow.txt": ("User-agent: *\nDisallow:\n", ["/", "/anything"]),
    "comments.txt": ("# crawl rules\nUser-agent: * # everyone\nDisallow: /cgi-bin/ # scripts\n\n",
                     ["/cgi-bin/run", "/index.html"]),
}


def make_robots():
    d = os.path.join(HERE, "robots")
    os.makedirs(d, exist_ok=True)
    expected = {}
    for name, (body, paths) in ROBOTS_CASES.items():
        with open(os.path.join(d, name), "w", encoding="utf-8", newline="\n") as f:
            f.write(body)
        rp = urllib.robotparser.RobotFileParser()
        rp.parse(body.splitlines())
        expected[name] = {p: rp.can_fetch("pharmaharvest/0.1", "https://example.org" + p) for p in paths}
    with open(os.path.join(d, "expected.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(expected, f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------- digests

def make_checksums():
    files = ["replay/faers/faers_ascii_2025q1.zip", "vaers/2024VAERSData.zip", "faers/DRUG25Q1.txt",
             "faers/REAC25Q1.txt", "replay/daen/atorvastatin/05_export.bin"]
    digests = {}
    for rel in files:
        with open(os.path.join(HERE, rel), "rb") as f:
            data = f.read()
        digests[rel] = {"sha256": hashlib.sha256(data).hexdigest(), "size": len(data)}
    with open(os.path.join(HERE, "checksums.json"), "w", encoding="utf-8", newline="\n") as f:
        json.dump(digests, f, indent=2, sort_keys=True)
        f.write("\n")


def main():
    make_dma()
    make_vigiaccess()
    make_lareb()
    make_medsafe()
    make_daen()
    make_faers()
    make_vaers()
    make_robots()
    make_checksums()


if __name__ == "__main__":
    main()
