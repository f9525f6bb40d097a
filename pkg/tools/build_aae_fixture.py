"""Write the bundled ten-essay brat fixture used when the full corpus is absent.

Each essay is a title line plus paragraphs. Components are given inline as
(id, type, text); offsets are computed here so the .ann files stay exact.
Run from the repository root: python3 tools/build_aae_fixture.py
"""

import pathlib

OUT = pathlib.Path("src/argmine/data/aae_fixture")

ESSAYS = {
    "essay001": dict(
        title="Should students wear school uniforms?",
        paras=[
            ["Schools everywhere debate dress codes. ",
             ("T1", "MajorClaim", "uniforms make schools calmer and fairer places"), ", in my view."],
            ["First of all, ", ("T2", "Claim", "uniforms reduce bullying"), ". ",
             ("T3", "Premise", "children can no longer be mocked for cheap clothes"), ", and ",
             ("T4", "Premise", "teachers report fewer fights in uniformed schools"), "."],
            ["Some argue that ", ("T5", "Claim", "uniforms limit self-expression"), ". However, ",
             ("T6", "Premise", "students still express themselves through music, art and speech"), "."],
            ["In conclusion, ", ("T7", "MajorClaim", "a uniform policy benefits every pupil"), "."],
        ],
        rels=[("R1", "supports", "T3", "T2"), ("R2", "supports", "T4", "T2"), ("R3", "attacks", "T6", "T5")],
        stances=[("A1", "T2", "For"), ("A2", "T5", "Against")],
    ),
    "essay002": dict(
        title="Online classes versus classroom teaching",
        paras=[
            ["Technology changed how we learn. I think ",
             ("T1", "MajorClaim", "classroom teaching remains more effective than online classes"), "."],
            [("T2", "Claim", "Face-to-face lessons keep students focused"), ", because ",
             ("T3", "Premise", "a teacher can notice confusion immediately"), ". Moreover, ",
             ("T4", "Premise", "classmates motivate each other during group work"), "."],
            ["On the other hand, ", ("T5", "Claim", "online classes save travel time"), ", since ",
             ("T6", "Premise", "learners study from home"), "."],
            ["To sum up, ", ("T7", "MajorClaim", "schools should keep most teaching in the classroom"), "."],
        ],
        rels=[("R1", "supports", "T3", "T2"), ("R2", "supports", "T4", "T2"), ("R3", "supports", "T6", "T5")],
        stances=[("A1", "T2", "For"), ("A2", "T5", "Against")],
    ),
    "essay003": dict(
        title="Is tourism good for local communities?",
        paras=[
            ["Every summer crowds arrive in small towns. ",
             ("T1", "MajorClaim", "tourism does more good than harm to local communities"), "."],
            [("T2", "Claim", "Tourism creates jobs"), ". ",
             ("T3", "Premise", "hotels, shops and guides all hire local residents"), ". For example, ",
             ("T4", "Premise", "my uncle found work as a boat driver for visitors"), "."],
            [("T5", "Claim", "Tourism also preserves culture"), ", as ",
             ("T6", "Premise", "visitors pay to see traditional festivals"), ". Admittedly, ",
             ("T7", "Premise", "some festivals become commercial shows"), "."],
            ["Therefore, ", ("T8", "MajorClaim", "towns should welcome tourists while protecting their heritage"), "."],
        ],
        rels=[("R1", "supports", "T3", "T2"), ("R2", "supports", "T4", "T3"), ("R3", "supports", "T6", "T5"),
              ("R4", "attacks", "T7", "T5")],
        stances=[("A1", "T2", "For"), ("A2", "T5", "For")],
    ),
    "essay004": dict(
        title="Children and mobile phones",
        paras=[
            ["Many parents buy phones for young children. I believe ",
             ("T1", "MajorClaim", "children under twelve should not own smartphones"), "."],
            [("T2", "Claim", "Smartphones harm concentration"), ". ",
             ("T3", "Premise", "constant notifications interrupt homework"), ", and ",
             ("T4", "Premise", "games are designed to be addictive"), "."],
            ["Nevertheless, ", ("T5", "Claim", "a basic phone can keep a child safe"), ", because ",
             ("T6", "Premise", "parents can call in an emergency"), "."],
            ["In short, ", ("T7", "MajorClaim", "young children need simple phones rather than smartphones"), "."],
        ],
        rels=[("R1", "supports", "T3", "T2"), ("R2", "supports", "T4", "T2"), ("R3", "supports", "T6", "T5")],
        stances=[("A1", "T2", "For"), ("A2", "T5", "For")],
    ),
    "essay005": dict(
        title="Should university education be free?",
        paras=[
            ["Tuition fees keep rising. ",
             ("T1", "MajorClaim", "governments should make university education free"), "."],
            [("T2", "Claim", "Free education increases fairness"), ". ",
             ("T3", "Premise", "talented students from poor families could attend"), ". In addition, ",
             ("T4", "Premise", "graduates would start work without heavy debt"), "."],
            ["Critics say ", ("T5", "Claim", "free tuition costs taxpayers too much"), ". Yet ",
             ("T6", "Premise", "educated citizens later pay more tax"), ", so ",
             ("T7", "Premise", "the investment returns over time"), "."],
            ["All things considered, ", ("T8", "MajorClaim", "free university education is worth its cost"), "."],
        ],
        rels=[("R1", "supports", "T3", "T2"), ("R2", "supports", "T4", "T2"), ("R3", "attacks", "T6", "T5"),
              ("R4", "supports", "T7", "T6")],
        stances=[("A1", "T2", "For"), ("A2", "T5", "Against")],
    ),
    "essay006": dict(
        title="Zoos in the modern world",
        paras=[
            ["Zoos attract millions of visitors. In my opinion, ",
             ("T1", "MajorClaim", "well-run zoos are important for wildlife protection"), "."],
            [("T2", "Claim", "Zoos support endangered species"), ". ",
             ("T3", "Premise", "breeding programs have saved several animals from extinction"), "."],
            [("T4", "Claim", "Zoos also educate the public"), ", because ",
             ("T5", "Premise", "children learn to respect animals they see in person"), ". Still, ",
             ("T6", "Premise", "small cages can teach the wrong lesson"), "."],
            ["Thus ", ("T7", "MajorClaim", "we should improve zoos rather than close them"), "."],
        ],
        rels=[("R1", "supports", "T3", "T2"), ("R2", "supports", "T5", "T4"), ("R3", "attacks", "T6", "T4")],
        stances=[("A1", "T2", "For"), ("A2", "T4", "For")],
    ),
    "essay007": dict(
        title="Working from home",
        paras=[
            ["Offices emptied during recent years. ",
             ("T1", "MajorClaim", "working from home should remain an option for employees"), "."],
            [("T2", "Claim", "Remote work improves well-being"), ". ",
             ("T3", "Premise", "workers avoid long commutes"), " and ",
             ("T4", "Premise", "they can spend more time with family"), "."],
            ["Admittedly, ", ("T5", "Claim", "teams lose some spontaneous communication"), ". ",
             ("T6", "Premise", "short chats in the corridor often spark ideas"), "."],
            ["Overall, ", ("T7", "MajorClaim", "flexible arrangements serve both companies and staff"), "."],
        ],
        rels=[("R1", "supports", "T3", "T2"), ("R2", "supports", "T4", "T2"), ("R3", "supports", "T6", "T5")],
        stances=[("A1", "T2", "For"), ("A2", "T5", "Against")],
    ),
    "essay008": dict(
        title="Competition or cooperation at school?",
        paras=[
            ["Teachers choose between ranking pupils and group tasks. ",
             ("T1", "MajorClaim", "cooperation teaches children more than competition"), "."],
            [("T2", "Claim", "Group work builds social skills"), ". ",
             ("T3", "Premise", "students must listen and negotiate"), ". For instance, ",
             ("T4", "Premise", "our science project required daily discussion"), "."],
            ["However, ", ("T5", "Claim", "competition can motivate strong students"), ", since ",
             ("T6", "Premise", "prizes reward extra effort"), "."],
            ["To conclude, ", ("T7", "MajorClaim", "schools should favor cooperation"), "."],
        ],
        rels=[("R1", "supports", "T3", "T2"), ("R2", "supports", "T4", "T2"), ("R3", "supports", "T6", "T5")],
        stances=[("A1", "T2", "For"), ("A2", "T5", "Against")],
    ),
    "essay009": dict(
        title="Public transport in big cities",
        paras=[
            ["Traffic jams waste hours every day. ",
             ("T1", "MajorClaim", "cities should invest in public transport instead of roads"), "."],
            [("T2", "Claim", "Buses and trains reduce pollution"), ", because ",
             ("T3", "Premise", "one bus replaces dozens of cars"), ". Also, ",
             ("T4", "Premise", "electric trains produce no exhaust"), "."],
            [("T5", "Claim", "Public transport is fairer"), ". ",
             ("T6", "Premise", "people without cars can reach jobs"), ", while ",
             ("T7", "Premise", "new roads mostly help drivers"), "."],
            ["Hence, ", ("T8", "MajorClaim", "transport budgets should prioritize buses and trains"), "."],
        ],
        rels=[("R1", "supports", "T3", "T2"), ("R2", "supports", "T4", "T2"), ("R3", "supports", "T6", "T5"),
              ("R4", "supports", "T7", "T5")],
        stances=[("A1", "T2", "For"), ("A2", "T5", "For")],
    ),
    "essay010": dict(
        title="Should art be a compulsory subject?",
        paras=[
            ["Timetables are crowded with tests. ",
             ("T1", "MajorClaim", "art deserves a compulsory place in the curriculum"), "."],
            [("T2", "Claim", "Art develops creativity"), ". ",
             ("T3", "Premise", "drawing and music train original thinking"), ". Some say ",
             ("T4", "Premise", "creativity cannot be taught"), ", but ",
             ("T5", "Premise", "practice clearly improves it"), "."],
            ["In conclusion, ", ("T6", "MajorClaim", "every pupil should study art"), "."],
        ],
        rels=[("R1", "supports", "T3", "T2"), ("R2", "attacks", "T4", "T2"), ("R3", "attacks", "T5", "T4")],
        stances=[("A1", "T2", "For")],
    ),
}

SPLIT = {name: ("TEST" if name in ("essay009", "essay010") else "TRAIN") for name in ESSAYS}


def build(name, essay):
    text = essay["title"] + "\n\n"
    ann = []
    for p, para in enumerate(essay["paras"]):
        for seg in para:
            if isinstance(seg, str):
                text += seg
            else:
                tid, kind, body = seg
                start = len(text)
                text += body
                ann.append(f"{tid}\t{kind} {start} {len(text)}\t{body}")
        if p != len(essay["paras"]) - 1:
            text += "\n"
    text += "\n"
    for rid, kind, a, b in essay["rels"]:
        ann.append(f"{rid}\t{kind} Arg1:{a} Arg2:{b}\t")
    for aid, tid, stance in essay["stances"]:
        ann.append(f"{aid}\tStance {tid} {stance}")
    (OUT / f"{name}.txt").write_text(text, encoding="utf-8")
    (OUT / f"{name}.ann").write_text("\n".join(ann) + "\n", encoding="utf-8")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for name, essay in ESSAYS.items():
        build(name, essay)
    rows = ['"ID";"SET"'] + [f'"{n}";"{s}"' for n, s in SPLIT.items()]
    (OUT / "train-test-split.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
