#!/usr/bin/env python3
"""Regenerates data/stimuli.csv, the bundled minimal-pair corpus.

Four experiments:
  EXP1       past-tense frames, antecedent (subject/object) disambiguated by gender
  EXP2_ARG   present-tense frames, same manipulation
  EXP2_FORM  object antecedent presented as a name or as a clitic pronoun
  EXP4       antecedent argument x grammatical person (first/second vs third)

Run from the repository root:  python3 data/generate_stimuli.py > data/stimuli.csv
"""

import csv
import sys

FEMALE = ["Lucia", "Maria", "Anna", "Giulia", "Sara", "Chiara", "Elena", "Francesca",
          "Laura", "Paola", "Silvia", "Marta", "Valeria", "Roberta", "Carla", "Teresa"]
MALE = ["Marco", "Mario", "Roberto", "Luca", "Paolo", "Andrea", "Giorgio", "Stefano",
        "Franco", "Davide", "Matteo", "Pietro", "Carlo", "Fabio", "Sergio", "Enrico"]

# (masculine, feminine) main-clause predicates
PAST_PREDICATES = [
    ("era appena tornato da Londra.", "era appena tornata da Londra."),
    ("era contento.", "era contenta."),
    ("era molto stanco.", "era molto stanca."),
    ("era piuttosto nervoso.", "era piuttosto nervosa."),
    ("era un po' preoccupato.", "era un po' preoccupata."),
    ("era davvero arrabbiato.", "era davvero arrabbiata."),
    ("era appena arrivato a Roma.", "era appena arrivata a Roma."),
    ("era sembrato sorpreso.", "era sembrata sorpresa."),
    ("era ancora offeso.", "era ancora offesa."),
    ("era molto agitato.", "era molto agitata."),
    ("era già uscito di casa.", "era già uscita di casa."),
    ("era rimasto in silenzio.", "era rimasta in silenzio."),
    ("era stato gentile.", "era stata gentile."),
    ("era tutto bagnato.", "era tutta bagnata."),
    ("era appena partito per Milano.", "era appena partita per Milano."),
    ("era piuttosto imbarazzato.", "era piuttosto imbarazzata."),
]
PAST_VERBS = ["ha telefonato a", "ha chiamato", "ha incontrato", "ha salutato",
              "ha aspettato", "ha visitato", "ha criticato", "ha abbracciato",
              "ha rivisto", "ha ringraziato", "ha accompagnato", "ha sentito",
              "ha cercato", "ha invitato", "ha aiutato", "ha seguito"]

PRESENT_PREDICATES = [
    ("diventa ansioso.", "diventa ansiosa."),
    ("è molto geloso.", "è molto gelosa."),
    ("sembra contento.", "sembra contenta."),
    ("si sente sollevato.", "si sente sollevata."),
    ("è un po' stanco.", "è un po' stanca."),
    ("diventa nervoso.", "diventa nervosa."),
    ("è sempre allegro.", "è sempre allegra."),
    ("si mostra offeso.", "si mostra offesa."),
    ("resta in silenzio tutto confuso.", "resta in silenzio tutta confusa."),
    ("è piuttosto agitato.", "è piuttosto agitata."),
    ("sembra preoccupato.", "sembra preoccupata."),
    ("diventa rosso in viso.", "diventa rossa in viso."),
    ("si sente imbarazzato.", "si sente imbarazzata."),
    ("è davvero sorpreso.", "è davvero sorpresa."),
    ("appare molto felice e rilassato.", "appare molto felice e rilassata."),
    ("è subito pronto a partire.", "è subito pronta a partire."),
]
# (finite verb, clitic form uses the same finite verb)
PRESENT_VERBS = ["cerca", "chiama", "saluta", "guarda", "aspetta", "incontra",
                 "aiuta", "ascolta", "invita", "segue", "accompagna", "visita",
                 "ringrazia", "sveglia", "abbraccia", "critica"]

EXP4_VERBS = ["litigato con", "parlato con", "discusso con", "cenato con",
              "ballato con", "giocato con", "scherzato con", "studiato con",
              "lavorato con", "viaggiato con", "pranzato con", "chiacchierato con",
              "passeggiato con", "collaborato con", "telefonato a", "mangiato con",
              "camminato con", "cantato con", "corso con", "nuotato con", "dipinto con"]
EXP4_PREDICATES = ["molto prepotente.", "piuttosto gentile.", "davvero felice.",
                   "un po' triste.", "molto paziente.", "piuttosto scortese.",
                   "davvero arrogante.", "molto cortese.", "un po' insolente.",
                   "davvero intelligente.", "molto elegante.", "piuttosto impaziente.",
                   "molto vivace.", "un po' ribelle.", "molto loquace.",
                   "davvero efficiente.", "piuttosto indifferente.", "un po' irritabile.",
                   "molto socievole.", "davvero originale.", "piuttosto debole."]
EXP4_NAMES = FEMALE[1:] + MALE[:6]


def rows():
    out = []

    def add(stim_id, exp, frame, factors, subordinate, main):
        text = f"{subordinate}, {main}"
        start = len(subordinate) + 2
        assert text[start:] == main
        fac = ";".join(f"{k}={v}" for k, v in factors)
        out.append([stim_id, exp, frame, fac, text, start])

    # EXP1: the first two frames are the canonical published examples.
    for i in range(16):
        fem_subject = i % 2 == 0
        f, m = FEMALE[i], MALE[i]
        subj, obj = (f, m) if fem_subject else (m, f)
        if i == 1:
            subj, obj = "Maria", "Mario"
            fem_subject = True
        verb = PAST_VERBS[i]
        masc, fem = PAST_PREDICATES[i]
        if i == 1:
            masc, fem = "era contento.", "era contenta."
        subordinate = f"Quando {subj} {verb} {obj}"
        frame = f"e1-{i + 1:02d}"
        subj_pred, obj_pred = (fem, masc) if fem_subject else (masc, fem)
        add(f"{frame}-subj", "EXP1", frame, [("antecedent", "subject")], subordinate, subj_pred)
        add(f"{frame}-obj", "EXP1", frame, [("antecedent", "object")], subordinate, obj_pred)

    # EXP2: subject/object antecedent with present-tense frames.
    for i in range(16):
        fem_subject = i % 2 == 1
        f, m = FEMALE[(i + 5) % 16], MALE[(i + 9) % 16]
        subj, obj = (f, m) if fem_subject else (m, f)
        verb = PRESENT_VERBS[i]
        masc, fem = PRESENT_PREDICATES[(i + 3) % 16]
        subordinate = f"Quando {subj} {verb} {obj}"
        frame = f"e2a-{i + 1:02d}"
        subj_pred, obj_pred = (fem, masc) if fem_subject else (masc, fem)
        add(f"{frame}-subj", "EXP2_ARG", frame, [("antecedent", "subject")], subordinate, subj_pred)
        add(f"{frame}-obj", "EXP2_ARG", frame, [("antecedent", "object")], subordinate, obj_pred)

    # EXP2: object antecedent as name vs clitic pronoun; the main clause always
    # agrees with the object.
    for i in range(16):
        fem_subject = i % 2 == 0
        f, m = FEMALE[(i + 11) % 16], MALE[(i + 2) % 16]
        subj, obj = (f, m) if fem_subject else (m, f)
        if i == 0:
            subj, obj = "Maria", "Roberto"
        clitic = "lo" if fem_subject else "la"
        verb = PRESENT_VERBS[(i + 7) % 16] if i else "cerca"
        masc, fem = PRESENT_PREDICATES[(i * 5) % 16] if i else PRESENT_PREDICATES[0]
        main = masc if fem_subject else fem
        frame = f"e2f-{i + 1:02d}"
        add(f"{frame}-name", "EXP2_FORM", frame, [("object_form", "name")],
            f"Quando {subj} {verb} {obj}", main)
        add(f"{frame}-pron", "EXP2_FORM", frame, [("object_form", "pronoun")],
            f"Quando {subj} {clitic} {verb}", main)

    # EXP4: argument x person. Odd frames use first person, even frames second.
    for i in range(21):
        first = i % 2 == 0
        aux, obl, cop = ("ho", "me", "ero") if first else ("hai", "te", "eri")
        name = EXP4_NAMES[i % len(EXP4_NAMES)]
        verb = EXP4_VERBS[i]
        prep = verb.split()[-1]
        participle = " ".join(verb.split()[:-1])
        pred = EXP4_PREDICATES[i]
        speaker_subject = f"Quando {aux} {participle} {prep} {name}"
        name_subject = f"Quando {name} ha {participle} {prep} {obl}"
        frame = f"e4-{i + 1:02d}"
        add(f"{frame}-subj-12", "EXP4", frame, [("argument", "subject"), ("person", "first_second")],
            speaker_subject, f"{cop} {pred}")
        add(f"{frame}-obj-12", "EXP4", frame, [("argument", "object"), ("person", "first_second")],
            name_subject, f"{cop} {pred}")
        add(f"{frame}-subj-3", "EXP4", frame, [("argument", "subject"), ("person", "third")],
            name_subject, f"era {pred}")
        add(f"{frame}-obj-3", "EXP4", frame, [("argument", "object"), ("person", "third")],
            speaker_subject, f"era {pred}")
    return out


def main():
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["stimulus_id", "experiment_id", "frame_id", "factors", "text", "main_clause_start"])
    for r in rows():
        w.writerow(r)


if __name__ == "__main__":
    main()
