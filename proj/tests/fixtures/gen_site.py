#!/usr/bin/env python3
"""Regenerates the static fixture store under tests/fixtures/site/.

60 HTML pages: root, 8 first-level sections, and three sections
(footwear, apparel, teams) that reach depth 3. Every page carries a short
nav block (Home + its own section) so nav/footer stripping is exercised.
"""
import pathlib
import shutil

OUT = pathlib.Path(__file__).resolve().parent / "site"

SECTIONS = [
    # slug, title, blurb
    ("footwear", "Footwear", "Cleats, running shoes and slides for every sport."),
    ("apparel", "Apparel", "Training tops, shorts and outerwear."),
    ("teams", "Teams", "Club and league partners we outfit every season."),
    ("accessories", "Accessories", "Bags, bottles, socks and gloves."),
    ("rewards", "Rewards", "The Stridewell Rewards loyalty program."),
    ("stores", "Stores", "Find a Stridewell store near you."),
    ("help", "Help", "Shipping, returns, sizing and order support."),
    ("about", "About", "Company history, sustainability and careers."),
]

# category slug, title, [(product slug, name, price, rating, detail)]
FOOTWEAR = [
    ("cleats", "Football Cleats", [
        ("ua-blur-pro", "UA Blur Pro", 110, 4.5, "Lightweight synthetic upper with a molded stud plate."),
        ("ua-spotlight-pro", "UA Spotlight Pro", 130, 4.7, "Lockdown collar and carbon-fiber plate for speed players."),
        ("ua-highlight-mc", "UA Highlight MC", 95, 4.2, "High-top ankle support built for linemen."),
    ]),
    ("running", "Running Shoes", [
        ("velo-glide-3", "Velo Glide 3", 140, 4.6, "Nitrogen-infused foam midsole with 8 mm drop."),
        ("trail-ridge-gtx", "Trail Ridge GTX", 155, 4.4, "Waterproof membrane and 5 mm lugs for mud."),
        ("tempo-lite", "Tempo Lite", 100, 4.1, "Race-day flat weighing 190 grams."),
    ]),
    ("slides", "Slides", [
        ("recover-slide", "Recover Slide", 35, 4.3, "Contoured footbed for post-game recovery."),
        ("locker-slide", "Locker Slide", 25, 4.0, "Quick-dry strap for showers and pool decks."),
        ("cloud-slide", "Cloud Slide", 45, 4.8, "Dual-density cushioning with arch support."),
    ]),
]

APPAREL = [
    ("tops", "Training Tops", [
        ("heatgear-tee", "HeatGear Tee", 30, 4.4, "Moisture-wicking knit with UPF 30 protection."),
        ("coldgear-mock", "ColdGear Mock", 55, 4.5, "Brushed interior for sub-freezing sessions."),
        ("seamless-tank", "Seamless Tank", 28, 4.1, "Body-mapped ventilation zones."),
    ]),
    ("shorts", "Shorts", [
        ("launch-short", "Launch Short", 40, 4.6, "7-inch inseam with zip back pocket."),
        ("vanish-short", "Vanish Short", 35, 4.2, "Four-way stretch woven fabric."),
        ("rival-fleece-short", "Rival Fleece Short", 45, 4.3, "Cotton-blend fleece for warm-ups."),
    ]),
    ("outerwear", "Outerwear", [
        ("storm-shell", "Storm Shell", 120, 4.5, "Seam-sealed shell rated to 10,000 mm."),
        ("insulated-vest", "Insulated Vest", 90, 4.0, "Synthetic fill that stays warm when wet."),
        ("sideline-parka", "Sideline Parka", 180, 4.7, "Knee-length parka for cold stadiums."),
    ]),
]

# league slug, title, [(team slug, name, founded, titles, detail)]
TEAMS = [
    ("pro-league", "Pro League", [
        ("harbor-city-hawks", "Harbor City Hawks", 1962, 3, "Last championship in 2019 over the Mesa Coyotes."),
        ("mesa-coyotes", "Mesa Coyotes", 1975, 1, "Won their only championship in 2008."),
        ("northfield-rangers", "Northfield Rangers", 1950, 5, "Most recent title came in 2021."),
    ]),
    ("college-league", "College League", [
        ("valley-state-owls", "Valley State Owls", 1921, 2, "Conference champions in 2016 and 2022."),
        ("lakeshore-tech", "Lakeshore Tech", 1934, 0, "Reached the final four in 2018."),
        ("pinecrest-university", "Pinecrest University", 1899, 4, "Won back-to-back titles in 2012 and 2013."),
    ]),
]

ACCESSORIES = [
    ("undeniable-duffle", "Undeniable Duffle", 50, 4.6, "58-liter duffle with vented shoe tunnel."),
    ("hydro-bottle", "Hydro Bottle", 30, 4.4, "32 oz insulated bottle keeping drinks cold 24 hours."),
    ("crew-socks-6pack", "Crew Socks 6-Pack", 22, 4.5, "Arch support and cushioned soles."),
    ("blitz-gloves", "Blitz Receiver Gloves", 45, 4.3, "Tacky palm grip rated for wet conditions."),
    ("team-backpack", "Team Backpack", 65, 4.2, "Laptop sleeve fits 15-inch devices."),
]

REWARDS = [
    ("tiers", "Membership Tiers", "Bronze starts at 0 points, Silver at 500 points and Gold at 1,500 points per year."),
    ("earning-points", "Earning Points", "Members earn 10 points per dollar spent and 200 bonus points on their birthday."),
    ("redeem", "Redeem Rewards", "Every 1,000 points converts into a 20 dollar reward code valid for 60 days."),
]

STORES = [
    ("locator.html?city=austin", "Store Locator", "Search stores by city, state or postal code."),
    ("locator.html?city=denver", "Store Locator", "Search stores by city, state or postal code."),
    ("hours.html", "Store Hours", "Flagship stores open 9 am to 9 pm Monday through Saturday and 11 am to 6 pm on Sunday."),
    ("events.html", "In-Store Events", "Gait analysis clinics run every first Saturday of the month in Austin and Denver."),
]

HELP = [
    ("shipping", "Shipping", "Standard shipping takes 3 to 5 business days and is free on orders over 75 dollars."),
    ("returns", "Returns", "Unworn items can be returned within 60 days; Gold members get 90 days."),
    ("size-guide", "Size Guide", "Cleats run half a size small; order half a size up from your running shoe size."),
    ("order-status", "Order Status", "Track an order with the order number and billing postal code."),
]

ABOUT = [
    ("history", "Our History", "Stridewell Athletics was founded in Baltimore in 1996 by three former college athletes."),
    ("sustainability", "Sustainability", "By 2030 Stridewell targets 75 percent recycled polyester across all apparel."),
    ("careers", "Careers", "Open roles in product design, retail and logistics; see our partner job board."),
]


def page(title, body, section=None, lang="en", extra_head=""):
    nav = ['<a href="/index.html">Home</a>']
    if section is not None:
        slug, stitle, _ = section
        nav.append(f'<a href="/{slug}.html">{stitle}</a>')
    return (
        "<!DOCTYPE html>\n"
        f'<html lang="{lang}">\n<head>\n<meta charset="utf-8">\n'
        f"<title>{title}</title>\n{extra_head}"
        "<style>body { font-family: sans-serif; }</style>\n"
        "</head>\n<body>\n"
        f'<nav class="top">{" ".join(nav)}</nav>\n'
        f"<main>\n{body}\n</main>\n"
        "<footer>&copy; 1996&ndash;2025 Stridewell Athletics. All rights reserved.</footer>\n"
        "<script>window.dataLayer = window.dataLayer || [];</script>\n"
        "</body>\n</html>\n"
    )


def write(rel, html):
    path = OUT / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(html, encoding="utf-8")


def main():
    if OUT.exists():
        shutil.rmtree(OUT)
    OUT.mkdir(parents=True)
    sec = {s[0]: s for s in SECTIONS}

    links = "\n".join(f'<li><a href="/{s}.html">{t}</a></li>' for s, t, _ in SECTIONS)
    write("index.html", page(
        "Stridewell Athletics",
        "<h1>Stridewell Athletics</h1>\n"
        "<p>Performance gear for athletes since 1996. Free shipping on orders over 75 dollars.</p>\n"
        f"<ul>\n{links}\n</ul>\n"
        '<p><a href="/private/admin.html">Staff portal</a></p>',
    ))

    def catalog(slug, groups, unit):
        s = sec[slug]
        items = "\n".join(f'<li><a href="/{slug}/{c}.html">{t}</a></li>' for c, t, _ in groups)
        write(f"{slug}.html", page(s[1], f"<h1>{s[1]}</h1>\n<p>{s[2]}</p>\n<ul>\n{items}\n</ul>", s))
        for ci, (cslug, ctitle, entries) in enumerate(groups):
            lis = "\n".join(
                f'<li><a href="/{slug}/{cslug}/{p[0]}.html">{p[1]}</a></li>' for p in entries)
            write(f"{slug}/{cslug}.html", page(
                ctitle,
                f"<h1>{ctitle}</h1>\n<p>{len(entries)} {unit} in {ctitle.lower()}.</p>\n<ul>\n{lis}\n</ul>", s))
            for pi, entry in enumerate(entries):
                # related link points to a sibling in the next group, so the
                # site contains lateral edges at depth 3
                nxt = groups[(ci + 1) % len(groups)]
                rel = nxt[2][pi]
                write(f"{slug}/{cslug}/{entry[0]}.html", leaf(slug, cslug, ctitle, entry, rel, nxt[0], s))

    def leaf(slug, cslug, ctitle, entry, rel, rel_cat, s):
        if slug == "teams":
            tslug, name, founded, titles, detail = entry
            body = (
                f"<h1>{name}</h1>\n<p>Founded in {founded}. Championships won: {titles}. {detail}</p>\n"
                f"<h2>Team Store</h2>\n<p>Official {name} jerseys are available in our apparel section.</p>\n"
                f'<a href="/teams/{cslug}.html">Back to {ctitle}</a>\n'
                f'<a href="/teams/{rel_cat}/{rel[0]}.html">Rival: {rel[1]}</a>\n'
                '<a href="/apparel/tops.html">Shop jerseys</a>'
            )
            return page(name, body, s)
        pslug, name, price, rating, detail = entry
        body = (
            f"<h1>{name}</h1>\n<p>Price: ${price}. Customer rating: {rating} out of 5. {detail}</p>\n"
            f"<h2>Specifications</h2>\n<p>Item number SW-{len(pslug) * 97 + price}.</p>\n"
            f'<a href="/{slug}/{cslug}.html">Back to {ctitle}</a>\n'
            f'<a href="/{slug}/{rel_cat}/{rel[0]}.html">Compare with {rel[1]}</a>\n'
            '<a href="/help/size-guide.html">Size guide</a>'
        )
        return page(name, body, s)

    catalog("footwear", FOOTWEAR, "styles")
    catalog("apparel", APPAREL, "styles")
    catalog("teams", TEAMS, "teams")

    def flat(slug, entries, render):
        s = sec[slug]
        items = "\n".join(f'<li><a href="/{slug}/{e[0] if "." in e[0] else e[0] + ".html"}">{e[1]}</a></li>'
                          for e in entries)
        write(f"{slug}.html", page(s[1], f"<h1>{s[1]}</h1>\n<p>{s[2]}</p>\n<ul>\n{items}\n</ul>", s))
        for e in entries:
            rel = e[0].split("?")[0]
            if "." not in rel:
                rel += ".html"
            write(f"{slug}/{rel}", page(e[1], render(e), s))

    flat("accessories", ACCESSORIES, lambda e: (
        f"<h1>{e[1]}</h1>\n<p>Price: ${e[2]}. Customer rating: {e[3]} out of 5. {e[4]}</p>\n"
        '<a href="/accessories.html">All accessories</a>'))
    flat("rewards", REWARDS, lambda e: (
        f"<h1>{e[1]}</h1>\n<p>{e[2]}</p>\n<a href=\"/rewards/tiers.html#gold\">Compare tiers</a>"))
    flat("stores", STORES, lambda e: (
        f"<h1>{e[1]}</h1>\n<p>{e[2]}</p>\n<a href=\"/stores/events.html\">Upcoming events</a>"))
    flat("help", HELP, lambda e: (
        f"<h1>{e[1]}</h1>\n<p>{e[2]}</p>\n<a href=\"/rewards/tiers.html\">Rewards members</a>"))
    flat("about", ABOUT, lambda e: (
        f"<h1>{e[1]}</h1>\n<p>{e[2]}</p>\n"
        + ('<a href="https://jobs.partner-board.example.org/stridewell">Partner job board</a>'
           if e[0] == "careers" else '<a href="/about.html">About Stridewell</a>')))

    (OUT / "robots.txt").write_text(
        "User-agent: *\nDisallow: /private/\n\nUser-agent: badbot\nDisallow: /\n", encoding="utf-8")
    # 1x1 transparent PNG, never linked; fetched directly by the non-html tests
    (OUT / "logo.png").write_bytes(bytes.fromhex(
        "89504e470d0a1a0a0000000d4948445200000001000000010806000000"
        "1f15c4890000000d49444154789c6360000002000154a24f5d0000000049454e44ae426082"))

    n = len([p for p in OUT.rglob("*.html")])
    print(f"wrote {n} html files")


if __name__ == "__main__":
    main()
