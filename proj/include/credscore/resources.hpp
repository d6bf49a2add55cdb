#pragma once

// Bundled default language resources (Spanish, with a few English finance
// words since advisors mix both). Each has an on-disk twin under
// data/resources/ with the same content; the loaders accept either.

#include <string_view>

namespace credscore::resources {

/// Spanish stop words (NLTK list), one per line.
inline constexpr std::string_view kSpanishStopwords = R"(de
la
que
el
en
y
a
los
del
se
las
por
un
para
con
no
una
su
al
lo
como
más
pero
sus
le
ya
o
este
sí
porque
esta
entre
cuando
muy
sin
sobre
también
me
hasta
hay
donde
quien
desde
todo
nos
durante
todos
uno
les
ni
contra
otros
ese
eso
ante
ellos
e
esto
mí
antes
algunos
qué
unos
yo
otro
otras
otra
él
tanto
esa
estos
mucho
quienes
nada
muchos
cual
poco
ella
estar
estas
algunas
algo
nosotros
mi
mis
tú
te
ti
tu
tus
ellas
nosotras
vosotros
vosotras
os
mío
mía
míos
mías
tuyo
tuya
tuyos
tuyas
suyo
suya
suyos
suyas
nuestro
nuestra
nuestros
nuestras
vuestro
vuestra
vuestros
vuestras
esos
esas
estoy
estás
está
estamos
estáis
están
esté
estés
estemos
estéis
estén
estaré
estarás
estará
estaremos
estaréis
estarán
estaría
estarías
estaríamos
estaríais
estarían
estaba
estabas
estábamos
estabais
estaban
estuve
estuviste
estuvo
estuvimos
estuvisteis
estuvieron
estuviera
estuvieras
estuviéramos
estuvierais
estuvieran
estuviese
estuvieses
estuviésemos
estuvieseis
estuviesen
estando
estado
estada
estados
estadas
estad
he
has
ha
hemos
habéis
han
haya
hayas
hayamos
hayáis
hayan
habré
habrás
habrá
habremos
habréis
habrán
habría
habrías
habríamos
habríais
habrían
había
habías
habíamos
habíais
habían
hube
hubiste
hubo
hubimos
hubisteis
hubieron
hubiera
hubieras
hubiéramos
hubierais
hubieran
hubiese
hubieses
hubiésemos
hubieseis
hubiesen
habiendo
habido
habida
habidos
habidas
soy
eres
es
somos
sois
son
sea
seas
seamos
seáis
sean
seré
serás
será
seremos
seréis
serán
sería
serías
seríamos
seríais
serían
era
eras
éramos
erais
eran
fui
fuiste
fue
fuimos
fuisteis
fueron
fuera
fueras
fuéramos
fuerais
fueran
fuese
fueses
fuésemos
fueseis
fuesen
sintiendo
sentido
sentida
sentidos
sentidas
siente
sentid
tengo
tienes
tiene
tenemos
tenéis
tienen
tenga
tengas
tengamos
tengáis
tengan
tendré
tendrás
tendrá
tendremos
tendréis
tendrán
tendría
tendrías
tendríamos
tendríais
tendrían
tenía
tenías
teníamos
teníais
tenían
tuve
tuviste
tuvo
tuvimos
tuvisteis
tuvieron
tuviera
tuvieras
tuviéramos
tuvierais
tuvieran
tuviese
tuvieses
tuviésemos
tuvieseis
tuviesen
teniendo
tenido
tenida
tenidos
tenidas
tened
)";

/// `form,lemma` pairs, matched after accent folding.
inline constexpr std::string_view kLemmaExceptions = R"(form,lemma
sube,subir
suben,subir
subio,subir
subira,subir
subiendo,subir
subida,subida
cae,caer
caen,caer
cayo,caer
caera,caer
cayendo,caer
baja,bajar
bajan,bajar
bajara,bajar
mejoraria,mejorar
mejora,mejorar
superase,superar
supera,superar
superara,superar
rompe,romper
rompio,romper
pierde,perder
pierden,perder
gana,ganar
ganan,ganar
va,ir
van,ir
iba,ir
veces,vez
)";

/// Ordered `suffix→replacement` rules; the first matching rule applies.
/// An empty replacement deletes the suffix.
inline constexpr std::string_view kSuffixRules = R"(iones→ion
ces→z
ales→al
bles→ble
istas→ista
ores→or
ando→ar
iendo→er
os→o
as→a
)";

/// `word,emotion_tags,sentiment`. Tags are `|`-separated from
/// {anger, fear, happiness, sadness, surprise}; sentiment is a signed score.
inline constexpr std::string_view kAffectLexicon = R"(word,emotion_tags,sentiment
alcista,happiness,1
bullish,happiness,1
subir,happiness,1
subida,happiness,1
ganancia,happiness,1
ganar,happiness,1
beneficio,happiness,1
mejorar,happiness,1
oportunidad,happiness|surprise,1
rebote,happiness,1
euforia,happiness,1
bueno,happiness,1
buena,happiness,1
feliz,happiness,1
fuerte,,1
superar,,1
maximo,,1
bajista,fear,-1
bearish,fear,-1
caer,fear,-1
caida,fear|sadness,-1
desplome,fear|surprise,-1
perder,sadness,-1
perdida,sadness,-1
miedo,fear,-1
panico,fear,-1
crisis,fear,-1
riesgo,fear,-1
debil,,-1
minimo,,-1
triste,sadness,-1
malo,sadness,-1
mala,sadness,-1
sorpresa,surprise,0
inesperado,surprise,0
increible,surprise,1
enfado,anger,-1
furia,anger,-1
estafa,anger,-1
fraude,anger,-1
manipulacion,anger,-1
)";

/// Closed-class word lists for the dictionary POS tagger, `class,word`.
inline constexpr std::string_view kPosLexicon = R"(class,word
aux,es
aux,son
aux,era
aux,eran
aux,fue
aux,fueron
aux,ser
aux,sera
aux,seria
aux,sea
aux,esta
aux,estan
aux,estar
aux,estaba
aux,estara
aux,ha
aux,han
aux,he
aux,hay
aux,habia
aux,haber
aux,habra
aux,puede
aux,pueden
aux,podria
aux,poder
aux,debe
aux,deben
aux,deberia
aux,is
aux,are
aux,was
aux,were
aux,be
aux,been
aux,will
aux,would
aux,can
aux,could
aux,should
aux,has
aux,have
aux,had
det,el
det,la
det,los
det,las
det,un
det,una
det,unos
det,unas
det,este
det,estos
det,estas
det,ese
det,esa
det,esos
det,esas
det,aquel
det,aquella
det,aquellos
det,aquellas
det,mi
det,mis
det,tu
det,tus
det,su
det,sus
det,nuestro
det,nuestra
det,nuestros
det,nuestras
det,al
det,del
det,cada
det,todo
det,toda
det,todos
det,todas
det,otro
det,otra
det,otros
det,otras
det,algun
det,alguna
det,algunos
det,algunas
det,ningun
det,ninguna
det,varios
det,varias
det,mucho
det,mucha
det,muchos
det,muchas
det,poco
det,poca
det,pocos
det,pocas
det,the
det,a
det,an
det,this
det,that
det,these
det,those
pron,yo
pron,ella
pron,ello
pron,nosotros
pron,nosotras
pron,vosotros
pron,vosotras
pron,ellos
pron,ellas
pron,me
pron,te
pron,se
pron,nos
pron,os
pron,le
pron,les
pron,lo
pron,ti
pron,conmigo
pron,contigo
pron,consigo
pron,que
pron,quien
pron,quienes
pron,cual
pron,cuales
pron,esto
pron,eso
pron,aquello
pron,algo
pron,nada
pron,alguien
pron,nadie
pron,usted
pron,ustedes
pron,i
pron,you
pron,he
pron,she
pron,it
pron,we
pron,they
pron,him
pron,her
pron,us
pron,them
adv,muy
adv,mas
adv,menos
adv,bien
adv,mal
adv,ya
adv,hoy
adv,ayer
adv,manana
adv,aqui
adv,alli
adv,ahora
adv,siempre
adv,nunca
adv,tambien
adv,tampoco
adv,todavia
adv,aun
adv,casi
adv,solo
adv,bastante
adv,demasiado
adv,pronto
adv,tarde
adv,asi
adv,no
adv,very
adv,now
adv,soon
adv,not
adj,alto
adj,alta
adj,bajo
adj,bueno
adj,buena
adj,malo
adj,mala
adj,grande
adj,fuerte
adj,debil
adj,nuevo
adj,nueva
adj,corto
adj,corta
adj,largo
adj,larga
adj,high
adj,low
adj,short
adj,long
adj,strong
adj,weak
)";

/// Suffixes that mark adjectives and adverbs for the dictionary tagger.
inline constexpr std::string_view kAdjectiveSuffixes = "ista istas oso osa osos osas ble bles ivo iva ivos ivas ico ica icos icas ish ous ive ful";
inline constexpr std::string_view kAdverbSuffixes = "mente ly";

}  // namespace credscore::resources
