String s = null;
System.out.println(s.length());
